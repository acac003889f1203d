#include "hfrec/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace hfrec {
namespace {

thread_local bool tl_in_parallel = false;

struct Job {
  std::function<void(int64_t, int64_t)> fn;
  int64_t n = 0;
  int64_t chunk = 0;
  std::atomic<int64_t> next{0};
  std::atomic<int64_t> pending{0};
  std::mutex mu;
  std::condition_variable done;
};

class Pool {
 public:
  explicit Pool(int workers) {
    for (int i = 0; i < workers; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(int64_t n, int64_t chunk, std::function<void(int64_t, int64_t)> fn) {
    std::lock_guard<std::mutex> serial(run_mu_);
    auto job = std::make_shared<Job>();
    job->fn = std::move(fn);
    job->n = n;
    job->chunk = chunk;
    job->pending.store((n + chunk - 1) / chunk, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lk(mu_);
      job_ = job;
      ++job_id_;
    }
    cv_.notify_all();
    execute(*job);
    std::unique_lock<std::mutex> lk(job->mu);
    job->done.wait(lk, [&] { return job->pending.load(std::memory_order_acquire) == 0; });
    std::lock_guard<std::mutex> jlk(mu_);
    job_.reset();
  }

 private:
  static void execute(Job& job) {
    tl_in_parallel = true;
    for (;;) {
      const int64_t begin = job.next.fetch_add(job.chunk, std::memory_order_relaxed);
      if (begin >= job.n) break;
      job.fn(begin, std::min(begin + job.chunk, job.n));
      if (job.pending.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::lock_guard<std::mutex> lk(job.mu);
        job.done.notify_all();
      }
    }
    tl_in_parallel = false;
  }

  void worker_loop() {
    uint64_t seen = 0;
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || (job_ && job_id_ != seen); });
        if (stop_) return;
        seen = job_id_;
        job = job_;
      }
      if (job) execute(*job);
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_, run_mu_;
  std::condition_variable cv_;
  bool stop_ = false;
  uint64_t job_id_ = 0;
  std::shared_ptr<Job> job_;
};

int resolve_thread_count() {
  if (const char* env = std::getenv("HFREC_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

Pool& pool() {
  static Pool p(std::max(0, thread_count() - 1));
  return p;
}

}  // namespace

int thread_count() {
  static const int n = resolve_thread_count();
  return n;
}

void parallel_for(int64_t n, int64_t grain, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  const int64_t chunk = std::max<int64_t>(1, grain);
  // Nested calls run inline: the pool handles one job at a time.
  if (tl_in_parallel || thread_count() == 1 || n <= chunk) {
    fn(0, n);
    return;
  }
  pool().run(n, chunk, fn);
}

}  // namespace hfrec
