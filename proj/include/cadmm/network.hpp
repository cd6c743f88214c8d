#ifndef CADMM_NETWORK_HPP
#define CADMM_NETWORK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <vector>

#include "cadmm/types.hpp"

namespace cadmm {

/// Symmetric neighbor graph without self-loops. Connectivity is validated
/// explicitly at startup through require_connected().
struct NeighborGraph {
    int N = 0;
    std::vector<std::uint8_t> adj;  // row-major N x N

    static NeighborGraph fully_connected(int N);
    /// Edge (i, j) iff ||p_i - p_j|| <= radius. positions is N x d.
    static NeighborGraph from_radius(const Eigen::MatrixXd& positions, double radius);

    bool edge(int i, int j) const { return i != j && adj[i * N + j] != 0; }
    /// Neighbor ids of i in ascending order.
    std::vector<int> neighbors(int i) const;
    int degree(int i) const;
    int num_edges() const;
    bool is_connected() const;
    void require_connected() const;
};

/// One logged payload delivery (or raw read) observed by the transport.
struct ReadRecord {
    int round = 0;
    int reader = 0;
    int source = 0;
};

/// Simulated synchronous message-passing transport. Each exchange round
/// delivers every agent's payload to exactly its graph neighbors, with
/// barrier semantics: exchange() only returns once every agent has posted,
/// and inboxes are ordered by sender id so downstream floating-point sums
/// are deterministic.
class SyncTransport {
public:
    struct Inbox {
        /// (sender id, payload) pairs in ascending sender order.
        std::vector<std::pair<int, const Eigen::VectorXd*>> messages;
    };

    explicit SyncTransport(NeighborGraph graph);

    /// Posts all payloads for `round` and returns per-agent inboxes. The
    /// outbox must contain exactly one payload per agent (index = agent id);
    /// an empty (size-0) payload counts as missing and aborts the round.
    /// Pointers in the inboxes stay valid until the next exchange call.
    std::vector<Inbox> exchange(int round, const std::vector<Eigen::VectorXd>& outbox);

    /// Raw instrumented read of another agent's last posted payload. Logged
    /// like a delivery; the audit decides whether it was legitimate.
    const Eigen::VectorXd& read(int round, int reader, int source);

    const NeighborGraph& graph() const { return graph_; }
    const std::vector<ReadRecord>& trace() const { return trace_; }
    long messages_delivered() const { return messages_delivered_; }
    int rounds_completed() const { return rounds_completed_; }

    /// Optional JSON-lines dump of every delivery: one object per message
    /// with round, sender, receiver, and payload norm.
    void set_round_dump(std::ostream* sink) { dump_ = sink; }

private:
    NeighborGraph graph_;
    std::vector<Eigen::VectorXd> slots_;
    std::vector<ReadRecord> trace_;
    std::mutex read_mutex_;
    long messages_delivered_ = 0;
    int rounds_completed_ = 0;
    std::ostream* dump_ = nullptr;
};

/// Returns every logged read whose (reader, source) pair is not an edge of
/// the graph. Empty result == the run was fully local.
std::vector<ReadRecord> audit_locality(const NeighborGraph& graph,
                                       const std::vector<ReadRecord>& trace);

}  // namespace cadmm

#endif  // CADMM_NETWORK_HPP
