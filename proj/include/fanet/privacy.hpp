// Audit instrument for the client/server data boundary: sample reads are
// counted only while a server scope is active, so a conforming federated
// run ends with a zero count and a violation is caught loudly.
#pragma once

namespace fanet {

class PrivacyAudit {
public:
    // called by every accessor that exposes client-held sample data
    static void note_sample_read();

    static long server_sample_reads();
    static void reset();
    static bool in_server_scope();

    // marks the enclosing block as server-side execution; nestable
    class ServerScope {
    public:
        ServerScope();
        ~ServerScope();
        ServerScope(const ServerScope&) = delete;
        ServerScope& operator=(const ServerScope&) = delete;
    };
};

}  // namespace fanet
