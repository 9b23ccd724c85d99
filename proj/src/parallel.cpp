#include "ptyblind/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ptyblind {
namespace {

class Pool {
public:
    Pool() {
        int n = thread_count();
        for (int i = 0; i < n - 1; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    void run(std::size_t n, const std::function<void(std::size_t)>& fn) {
        if (n == 0) return;
        if (workers_.empty() || n == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        std::unique_lock<std::mutex> lock(mutex_);
        job_ = &fn;
        total_ = n;
        next_.store(0);
        remaining_.store(n);
        error_ = nullptr;
        generation_++;
        cv_.notify_all();
        lock.unlock();

        drain();

        std::unique_lock<std::mutex> done_lock(mutex_);
        done_cv_.wait(done_lock, [this] { return remaining_.load() == 0; });
        job_ = nullptr;
        if (error_) std::rethrow_exception(error_);
    }

private:
    void drain() {
        for (;;) {
            std::size_t i = next_.fetch_add(1);
            if (i >= total_) break;
            run_one(i);
        }
    }

    void run_one(std::size_t i) {
        try {
            (*job_)(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
        if (remaining_.fetch_sub(1) == 1) {
            std::lock_guard<std::mutex> lock(mutex_);
            done_cv_.notify_all();
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lock(mutex_);
            cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            lock.unlock();
            for (;;) {
                std::size_t i = next_.fetch_add(1);
                if (i >= total_) break;
                run_one(i);
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t total_ = 0;
    std::atomic<std::size_t> next_{0};
    std::atomic<std::size_t> remaining_{0};
    std::uint64_t generation_ = 0;
    std::exception_ptr error_;
    bool stop_ = false;
};

}  // namespace

int thread_count() {
    static int n = [] {
        if (const char* env = std::getenv("PTYBLIND_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }();
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    static Pool pool;
    pool.run(n, fn);
}

}  // namespace ptyblind
