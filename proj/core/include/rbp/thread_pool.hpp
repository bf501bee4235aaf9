// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace rbp {

/// Fixed-size worker pool with an index-based parallel_for. Work items must
/// not touch shared mutable state; result slots are indexed so assembly
/// order never depends on completion order.
class ThreadPool {
  public:
    explicit ThreadPool(unsigned threads) {
        if (threads == 0) threads = 1;
        workers_.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) {
            workers_.emplace_back([this] { run(); });
        }
    }

    ~ThreadPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const { return workers_.size(); }

    /// Runs fn(i) for i in [0, count). Blocks until all items finish;
    /// rethrows the first exception raised by any item.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
        if (count == 0) return;
        std::mutex done_mutex;
        std::condition_variable done_cv;
        std::size_t remaining = count;
        std::exception_ptr first_error;

        {
            std::lock_guard lock(mutex_);
            for (std::size_t i = 0; i < count; ++i) {
                tasks_.push([&, i] {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard dl(done_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                    {
                        std::lock_guard dl(done_mutex);
                        --remaining;
                    }
                    done_cv.notify_one();
                });
            }
        }
        cv_.notify_all();

        std::unique_lock done_lock(done_mutex);
        done_cv.wait(done_lock, [&] { return remaining == 0; });
        if (first_error) std::rethrow_exception(first_error);
    }

  private:
    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
                if (stop_ && tasks_.empty()) return;
                task = std::move(tasks_.front());
                tasks_.pop();
            }
            task();
        }
    }

    std::vector<std::thread> workers_;
    std::queue<std::function<void()>> tasks_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stop_ = false;
};

}  // namespace rbp
