#include "cadmm/network.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace cadmm {

NeighborGraph NeighborGraph::fully_connected(int N) {
    if (N < 1) throw std::invalid_argument("graph needs at least one node");
    NeighborGraph g;
    g.N = N;
    g.adj.assign(static_cast<std::size_t>(N) * N, 1);
    for (int i = 0; i < N; ++i) g.adj[i * N + i] = 0;
    return g;
}

NeighborGraph NeighborGraph::from_radius(const Eigen::MatrixXd& positions, double radius) {
    const int N = static_cast<int>(positions.rows());
    if (N < 1) throw std::invalid_argument("graph needs at least one node");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    NeighborGraph g;
    g.N = N;
    g.adj.assign(static_cast<std::size_t>(N) * N, 0);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const double dist = (positions.row(i) - positions.row(j)).norm();
            if (dist <= radius) {
                g.adj[i * N + j] = 1;
                g.adj[j * N + i] = 1;
            }
        }
    }
    return g;
}

std::vector<int> NeighborGraph::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < N; ++j) {
        if (edge(i, j)) out.push_back(j);
    }
    return out;
}

int NeighborGraph::degree(int i) const {
    int deg = 0;
    for (int j = 0; j < N; ++j) {
        if (edge(i, j)) ++deg;
    }
    return deg;
}

int NeighborGraph::num_edges() const {
    int count = 0;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if (edge(i, j)) ++count;
        }
    }
    return count;
}

bool NeighborGraph::is_connected() const {
    if (N <= 1) return true;
    std::vector<char> seen(N, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        for (int j = 0; j < N; ++j) {
            if (edge(i, j) && !seen[j]) {
                seen[j] = 1;
                ++reached;
                queue.push_back(j);
            }
        }
    }
    return reached == N;
}

void NeighborGraph::require_connected() const {
    if (!is_connected()) {
        throw ConfigError("neighbor graph is disconnected; consensus cannot reach agreement");
    }
}

SyncTransport::SyncTransport(NeighborGraph graph) : graph_(std::move(graph)) {
    slots_.resize(graph_.N);
}

std::vector<SyncTransport::Inbox> SyncTransport::exchange(
    int round, const std::vector<Eigen::VectorXd>& outbox) {
    if (static_cast<int>(outbox.size()) != graph_.N) {
        throw std::invalid_argument("exchange requires one payload per agent");
    }
    for (int i = 0; i < graph_.N; ++i) {
        if (outbox[i].size() == 0) {
            throw std::invalid_argument("agent " + std::to_string(i) +
                                        " posted an empty payload; round aborted");
        }
    }
    for (int i = 0; i < graph_.N; ++i) slots_[i] = outbox[i];

    std::vector<Inbox> inboxes(graph_.N);
    for (int reader = 0; reader < graph_.N; ++reader) {
        for (int source = 0; source < graph_.N; ++source) {
            if (!graph_.edge(reader, source)) continue;
            inboxes[reader].messages.emplace_back(source, &slots_[source]);
            trace_.push_back(ReadRecord{round, reader, source});
            ++messages_delivered_;
            if (dump_ != nullptr) {
                (*dump_) << "{\"round\":" << round << ",\"from\":" << source
                         << ",\"to\":" << reader << ",\"norm\":" << slots_[source].norm()
                         << "}\n";
            }
        }
    }
    ++rounds_completed_;
    return inboxes;
}

const Eigen::VectorXd& SyncTransport::read(int round, int reader, int source) {
    if (source < 0 || source >= graph_.N || reader < 0 || reader >= graph_.N) {
        throw std::out_of_range("read outside agent range");
    }
    {
        std::lock_guard<std::mutex> lock(read_mutex_);
        trace_.push_back(ReadRecord{round, reader, source});
    }
    return slots_[source];
}

std::vector<ReadRecord> audit_locality(const NeighborGraph& graph,
                                       const std::vector<ReadRecord>& trace) {
    std::vector<ReadRecord> violations;
    for (const ReadRecord& rec : trace) {
        if (!graph.edge(rec.reader, rec.source)) violations.push_back(rec);
    }
    return violations;
}

}  // namespace cadmm
