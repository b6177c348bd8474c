#include "fanet/privacy.hpp"

#include <atomic>

namespace fanet {

namespace {
thread_local int server_depth = 0;
std::atomic<long> server_reads{0};
}  // namespace

void PrivacyAudit::note_sample_read() {
    if (server_depth > 0) server_reads.fetch_add(1, std::memory_order_relaxed);
}

long PrivacyAudit::server_sample_reads() {
    return server_reads.load(std::memory_order_relaxed);
}

void PrivacyAudit::reset() { server_reads.store(0, std::memory_order_relaxed); }

bool PrivacyAudit::in_server_scope() { return server_depth > 0; }

PrivacyAudit::ServerScope::ServerScope() { ++server_depth; }

PrivacyAudit::ServerScope::~ServerScope() { --server_depth; }

}  // namespace fanet
