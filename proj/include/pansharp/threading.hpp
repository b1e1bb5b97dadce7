// Copyright (c) 2026, the pansharp authors
// SPDX-License-Identifier: Apache-2.0
//
// Tiny persistent worker pool. Work is always split into one contiguous chunk
// per worker slot (fixed partition of the index range), so writes to disjoint
// output regions are race-free and results do not depend on scheduling order.
#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pansharp {

class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  int threads() const { return n_threads_; }

  void set_threads(int n) {
    if (n < 1) n = 1;
    if (n == n_threads_) return;
    stop_workers();
    n_threads_ = n;
    start_workers();
  }

  // Runs fn(chunk_begin, chunk_end, chunk_index) on each of threads() fixed
  // chunks of [0, n). Chunk c covers [c*n/T, (c+1)*n/T).
  void run_chunks(int64_t n, const std::function<void(int64_t, int64_t, int)>& fn) {
    if (n <= 0) return;
    int t = n_threads_;
    if (t == 1 || n == 1) {
      for (int c = 0; c < t; ++c) {
        auto [b, e] = chunk_range(n, t, c);
        if (b < e) fn(b, e, c);
      }
      return;
    }
    {
      std::unique_lock<std::mutex> lk(mu_);
      job_fn_ = &fn;
      job_n_ = n;
      pending_ = t - 1;
      ++generation_;
    }
    cv_start_.notify_all();
    // Main thread takes chunk 0.
    auto [b, e] = chunk_range(n, t, 0);
    if (b < e) run_guarded(fn, b, e, 0);
    {
      std::unique_lock<std::mutex> lk(mu_);
      cv_done_.wait(lk, [&] { return pending_ == 0; });
      job_fn_ = nullptr;
    }
    if (error_) {
      std::exception_ptr err = error_;
      error_ = nullptr;
      std::rethrow_exception(err);
    }
  }

  static std::pair<int64_t, int64_t> chunk_range(int64_t n, int t, int c) {
    return {n * c / t, n * (c + 1) / t};
  }

  ~ThreadPool() { stop_workers(); }

 private:
  ThreadPool() {
    unsigned hw = std::thread::hardware_concurrency();
    n_threads_ = static_cast<int>(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
    start_workers();
  }

  void run_guarded(const std::function<void(int64_t, int64_t, int)>& fn, int64_t b, int64_t e, int c) {
    try {
      fn(b, e, c);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void start_workers() {
    stop_ = false;
    workers_.clear();
    for (int c = 1; c < n_threads_; ++c) {
      workers_.emplace_back([this, c] { worker_loop(c); });
    }
  }

  void stop_workers() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_start_.notify_all();
    for (auto& w : workers_) {
      if (w.joinable()) w.join();
    }
    workers_.clear();
  }

  void worker_loop(int chunk_index) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int64_t, int64_t, int)>* fn = nullptr;
      int64_t n = 0;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
        seen = generation_;
        if (stop_) return;
        fn = job_fn_;
        n = job_n_;
      }
      if (fn) {
        auto [b, e] = chunk_range(n, n_threads_, chunk_index);
        if (b < e) run_guarded(*fn, b, e, chunk_index);
      }
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (--pending_ == 0) cv_done_.notify_all();
      }
    }
  }

  int n_threads_ = 1;
  std::vector<std::thread> workers_;
  std::mutex mu_, err_mu_;
  std::condition_variable cv_start_, cv_done_;
  const std::function<void(int64_t, int64_t, int)>* job_fn_ = nullptr;
  int64_t job_n_ = 0;
  int pending_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_ = nullptr;
};

// Convenience: parallel loop over [0, n) items, fn(i).
template <typename F>
void parallel_for(int64_t n, F&& fn) {
  ThreadPool::instance().run_chunks(n, [&](int64_t b, int64_t e, int) {
    for (int64_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace pansharp
