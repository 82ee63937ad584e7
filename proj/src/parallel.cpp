#include "dbnmf/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dbnmf {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() noexcept { return g_threads.load(std::memory_order_relaxed); }

void set_thread_count(int n) noexcept { g_threads.store(std::max(1, n), std::memory_order_relaxed); }

void configure_threads_from_env()
{
    const char* value = std::getenv("DBNMF_THREADS");
    if (value == nullptr) return;
    try {
        set_thread_count(std::stoi(value));
    } catch (const std::exception&) {
        set_thread_count(1);
    }
}

} // namespace dbnmf
