#include "fogsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stack>
#include <stdexcept>

#include "fogsim/rng.hpp"

namespace fogsim {

const char* role_name(Role r) {
    switch (r) {
        case Role::Cloud: return "cloud";
        case Role::Fog: return "fog";
        case Role::IotCluster: return "iot";
    }
    throw std::logic_error("role_name: bad role");
}

Role role_from_name(const std::string& name) {
    if (name == "cloud") return Role::Cloud;
    if (name == "fog") return Role::Fog;
    if (name == "iot") return Role::IotCluster;
    throw std::invalid_argument("unknown role: " + name);
}

namespace {

std::vector<std::vector<int>> neighbor_lists(int n, std::span<const std::pair<int, int>> edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n) throw std::invalid_argument("edge endpoint out of range");
        if (u == v) throw std::invalid_argument("self-loop edge");
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    return adj;
}

bool connected(int n, const std::vector<std::vector<int>>& adj) {
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

// Prints doubles so that round-tripping through text is lossless while small
// integral values stay readable.
std::string fmt_num(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<double> betweenness(int n_nodes, std::span<const std::pair<int, int>> edges) {
    if (n_nodes <= 0) throw std::invalid_argument("betweenness: empty graph");
    auto adj = neighbor_lists(n_nodes, edges);
    if (!connected(n_nodes, adj)) throw std::invalid_argument("betweenness: graph is disconnected");

    std::vector<double> cb(n_nodes, 0.0);
    for (int s = 0; s < n_nodes; ++s) {
        std::stack<int> order;
        std::vector<std::vector<int>> pred(n_nodes);
        std::vector<long long> sigma(n_nodes, 0);
        std::vector<int> dist(n_nodes, -1);
        sigma[s] = 1;
        dist[s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            order.push(v);
            for (int w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
        std::vector<double> delta(n_nodes, 0.0);
        while (!order.empty()) {
            int w = order.top();
            order.pop();
            for (int v : pred[w]) {
                delta[v] += static_cast<double>(sigma[v]) / static_cast<double>(sigma[w]) * (1.0 + delta[w]);
            }
            if (w != s) cb[w] += delta[w];
        }
    }
    // Each unordered pair was visited from both endpoints.
    for (double& v : cb) v *= 0.5;
    return cb;
}

PathResult fastest_path(const Topology& t, int src, int dst, double msg_bytes) {
    const int n = static_cast<int>(t.nodes().size());
    if (src < 0 || src >= n || dst < 0 || dst >= n) throw std::invalid_argument("fastest_path: node id out of range");
    if (src == dst) throw std::invalid_argument("fastest_path: src == dst");
    if (msg_bytes < 0) throw std::invalid_argument("fastest_path: negative message size");

    const auto& adj = t.adjacency();
    const auto& links = t.links();
    auto edge_cost = [&](int link_idx) { return msg_bytes / links[link_idx].bw + links[link_idx].pr; };

    // Dijkstra rooted at dst; edge costs are symmetric.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    dist[dst] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, dst);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto [v, li] : adj[u]) {
            double nd = d + edge_cost(li);
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    if (dist[src] == kInf) throw std::runtime_error("fastest_path: destination unreachable");

    // Walk forward from src, always taking the smallest-id neighbor that stays
    // on a minimum-cost path. Equal-cost alternatives produce bitwise-equal
    // sums here, so the comparison below finds them.
    PathResult res;
    res.latency_ms = dist[src];
    res.nodes.push_back(src);
    std::vector<char> visited(n, 0);
    visited[src] = 1;
    int u = src;
    while (u != dst) {
        int best = -1;
        for (auto [v, li] : adj[u]) {
            if (visited[v]) continue;
            if (edge_cost(li) + dist[v] == dist[u] && (best == -1 || v < best)) best = v;
        }
        if (best == -1) throw std::logic_error("fastest_path: route reconstruction failed");
        visited[best] = 1;
        res.nodes.push_back(best);
        u = best;
    }
    return res;
}

const Node& Topology::node(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size())) throw std::invalid_argument("node id out of range");
    return nodes_[static_cast<size_t>(id)];
}

const Route* Topology::route(int src, int dst) const {
    auto it = routes_.find({src, dst});
    return it == routes_.end() ? nullptr : &it->second;
}

double Topology::transit_ms(int src, int dst, double msg_bytes) const {
    const Route* r = route(src, dst);
    if (r == nullptr) throw std::runtime_error("no precomputed route between nodes");
    double total = 0.0;
    for (int li : r->links) total += msg_bytes / links_[li].bw + links_[li].pr;
    return total;
}

void Topology::validate() const {
    const int n = static_cast<int>(nodes_.size());
    if (n < 3) throw std::invalid_argument("topology needs at least cloud, fog, and cluster nodes");
    int clouds = 0, fogs = 0, clusters = 0;
    for (int i = 0; i < n; ++i) {
        const Node& nd = nodes_[static_cast<size_t>(i)];
        if (nd.id != i) throw std::invalid_argument("node ids must be 0..n-1 in order");
        switch (nd.role) {
            case Role::Cloud: ++clouds; break;
            case Role::Fog: ++fogs; break;
            case Role::IotCluster: ++clusters; break;
        }
        if ((nd.role == Role::Cloud || nd.role == Role::Fog) && nd.ipt <= 0.0)
            throw std::invalid_argument("compute nodes must have positive ipt");
    }
    if (clouds != 1) throw std::invalid_argument("topology must have exactly one cloud node");
    if (fogs < 1) throw std::invalid_argument("topology must have at least one fog node");
    if (clusters < 1) throw std::invalid_argument("topology must have at least one iot cluster");

    std::set<std::pair<int, int>> seen;
    for (const Link& l : links_) {
        if (l.u < 0 || l.u >= n || l.v < 0 || l.v >= n) throw std::invalid_argument("link endpoint out of range");
        if (l.u == l.v) throw std::invalid_argument("link endpoints must be distinct");
        if (l.bw <= 0.0) throw std::invalid_argument("link bandwidth must be positive");
        if (l.pr < 0.0) throw std::invalid_argument("link propagation delay must be non-negative");
        auto key = std::minmax(l.u, l.v);
        if (!seen.insert({key.first, key.second}).second) throw std::invalid_argument("duplicate link");
    }

    std::vector<std::vector<int>> adj(n);
    for (const Link& l : links_) {
        adj[l.u].push_back(l.v);
        adj[l.v].push_back(l.u);
    }
    if (!connected(n, adj)) throw std::invalid_argument("topology graph is disconnected");
}

void Topology::build_adjacency() {
    adj_.assign(nodes_.size(), {});
    for (int li = 0; li < static_cast<int>(links_.size()); ++li) {
        adj_[links_[li].u].emplace_back(links_[li].v, li);
        adj_[links_[li].v].emplace_back(links_[li].u, li);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

void Topology::build_routes() {
    cloud_id_ = -1;
    fog_ids_.clear();
    cluster_ids_.clear();
    for (const Node& nd : nodes_) {
        switch (nd.role) {
            case Role::Cloud: cloud_id_ = nd.id; break;
            case Role::Fog: fog_ids_.push_back(nd.id); break;
            case Role::IotCluster: cluster_ids_.push_back(nd.id); break;
        }
    }

    auto link_between = [&](int a, int b) {
        for (auto [v, li] : adj_[a])
            if (v == b) return li;
        throw std::logic_error("missing link on route");
    };
    auto store = [&](int src, int dst) {
        if (routes_.count({src, dst})) return;
        PathResult p = fastest_path(*this, src, dst, ref_msg_bytes_);
        Route r;
        r.nodes = p.nodes;
        for (size_t i = 0; i + 1 < p.nodes.size(); ++i)
            r.links.push_back(link_between(p.nodes[i], p.nodes[i + 1]));
        routes_[{src, dst}] = std::move(r);
    };

    for (int c : cluster_ids_) {
        for (int f : fog_ids_) {
            store(c, f);
            store(f, c);
        }
        store(cloud_id_, c);
    }
    for (int f : fog_ids_) {
        store(f, cloud_id_);
        store(cloud_id_, f);
    }
}

Topology Topology::from_parts(std::vector<Node> nodes, std::vector<Link> links, double ref_msg_bytes) {
    if (ref_msg_bytes < 0) throw std::invalid_argument("ref_msg_bytes must be non-negative");
    Topology t;
    t.nodes_ = std::move(nodes);
    t.links_ = std::move(links);
    t.ref_msg_bytes_ = ref_msg_bytes;
    t.validate();
    t.build_adjacency();
    t.build_routes();
    return t;
}

Topology Topology::from_graph(int n_nodes, std::span<const std::pair<int, int>> edges, const TopoParams& p) {
    if (p.n_clusters < 1) throw std::invalid_argument("need at least one iot cluster");
    if (n_nodes < p.n_clusters + 2)
        throw std::invalid_argument("n_nodes must be at least n_clusters + 2 (cloud plus one fog)");
    if (p.fog_ipt_tiers.empty()) throw std::invalid_argument("fog ipt tier set is empty");
    if (p.link_bw_choices.empty()) throw std::invalid_argument("link bandwidth choice set is empty");
    if (p.link_pr_min < 0 || p.link_pr_max < p.link_pr_min) throw std::invalid_argument("bad link pr range");

    std::vector<double> cb = betweenness(n_nodes, edges);

    // Order by (centrality, id): cloud from the top, clusters from the bottom.
    std::vector<int> order(n_nodes);
    for (int i = 0; i < n_nodes; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cb[a] != cb[b] ? cb[a] < cb[b] : a < b; });

    std::vector<Role> roles(n_nodes, Role::Fog);
    int cloud = 0;
    for (int i = 1; i < n_nodes; ++i)
        if (cb[i] > cb[cloud]) cloud = i;  // ties keep the lowest id
    roles[cloud] = Role::Cloud;
    int assigned = 0;
    for (int i = 0; i < n_nodes && assigned < p.n_clusters; ++i) {
        if (order[i] == cloud) continue;
        roles[order[i]] = Role::IotCluster;
        ++assigned;
    }

    std::vector<int> fogs;
    for (int i = 0; i < n_nodes; ++i)
        if (roles[i] == Role::Fog) fogs.push_back(i);
    std::sort(fogs.begin(), fogs.end(),
              [&](int a, int b) { return cb[a] != cb[b] ? cb[a] < cb[b] : a < b; });

    Topology t;
    t.ref_msg_bytes_ = p.ref_msg_bytes;
    t.nodes_.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        Node& nd = t.nodes_[static_cast<size_t>(i)];
        nd.id = i;
        nd.role = roles[i];
        switch (roles[i]) {
            case Role::Cloud:
                nd.ipt = p.cloud_ipt;
                nd.ram = p.cloud_ram;
                break;
            case Role::IotCluster:
                nd.ipt = 0.0;
                nd.ram = p.cluster_ram;
                break;
            case Role::Fog:
                nd.ram = p.fog_ram;
                break;
        }
    }
    // Lowest-centrality fogs get the fastest tier.
    const int n_fog = static_cast<int>(fogs.size());
    const int n_tiers = static_cast<int>(p.fog_ipt_tiers.size());
    for (int r = 0; r < n_fog; ++r) {
        int tier = r * n_tiers / n_fog;
        t.nodes_[static_cast<size_t>(fogs[r])].ipt = p.fog_ipt_tiers[static_cast<size_t>(tier)];
    }

    Rng link_rng(derive_seed(p.seed, 0x4c494e4bULL));  // "LINK"
    for (const auto& [u, v] : edges) {
        Link l;
        l.u = u;
        l.v = v;
        l.bw = p.link_bw_choices[static_cast<size_t>(link_rng.uniform_int(static_cast<int>(p.link_bw_choices.size())))];
        l.pr = static_cast<double>(p.link_pr_min + link_rng.uniform_int(p.link_pr_max - p.link_pr_min + 1));
        t.links_.push_back(l);
    }

    t.validate();
    t.build_adjacency();
    t.build_routes();
    return t;
}

Topology Topology::generate(const TopoParams& p) {
    if (p.n_clusters < 1) throw std::invalid_argument("need at least one iot cluster");
    if (p.n_nodes < p.n_clusters + 2)
        throw std::invalid_argument("n_nodes must be at least n_clusters + 2 (cloud plus one fog)");

    // Barabasi-Albert preferential attachment, m = 2, seeded with a triangle.
    // Attachment targets are drawn from the multiset of edge endpoints.
    Rng rng(derive_seed(p.seed, 0x42414752ULL));  // "BAGR"
    std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {0, 2}};
    std::vector<int> endpoint_pool{0, 1, 0, 2, 1, 2};
    const int m = 2;
    for (int v = 3; v < p.n_nodes; ++v) {
        std::vector<int> targets;
        while (static_cast<int>(targets.size()) < std::min(m, v)) {
            int cand = endpoint_pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(endpoint_pool.size())))];
            if (std::find(targets.begin(), targets.end(), cand) == targets.end()) targets.push_back(cand);
        }
        for (int tgt : targets) {
            edges.emplace_back(tgt, v);
            endpoint_pool.push_back(tgt);
            endpoint_pool.push_back(v);
        }
    }
    return from_graph(p.n_nodes, edges, p);
}

std::string Topology::to_text() const {
    std::ostringstream out;
    out << "fogsim-topology v1\n";
    out << "refbytes " << fmt_num(ref_msg_bytes_) << "\n";
    out << "nodes " << nodes_.size() << "\n";
    for (const Node& n : nodes_)
        out << n.id << " " << role_name(n.role) << " " << fmt_num(n.ipt) << " " << fmt_num(n.ram) << "\n";
    out << "links " << links_.size() << "\n";
    for (const Link& l : links_)
        out << l.u << " " << l.v << " " << fmt_num(l.bw) << " " << fmt_num(l.pr) << "\n";
    return out.str();
}

Topology Topology::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "fogsim-topology" || version != "v1")
        throw std::invalid_argument("not a fogsim topology file");
    std::string key;
    double refbytes = 0.0;
    in >> key >> refbytes;
    if (key != "refbytes") throw std::invalid_argument("topology file: expected refbytes");
    size_t n_nodes = 0;
    in >> key >> n_nodes;
    if (key != "nodes") throw std::invalid_argument("topology file: expected node table");
    std::vector<Node> nodes(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) {
        std::string role;
        if (!(in >> nodes[i].id >> role >> nodes[i].ipt >> nodes[i].ram))
            throw std::invalid_argument("topology file: truncated node table");
        nodes[i].role = role_from_name(role);
    }
    size_t n_links = 0;
    in >> key >> n_links;
    if (key != "links") throw std::invalid_argument("topology file: expected link table");
    std::vector<Link> links(n_links);
    for (size_t i = 0; i < n_links; ++i) {
        if (!(in >> links[i].u >> links[i].v >> links[i].bw >> links[i].pr))
            throw std::invalid_argument("topology file: truncated link table");
    }
    return from_parts(std::move(nodes), std::move(links), refbytes);
}

Topology Topology::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open topology file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return from_text(buf.str());
}

void Topology::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write topology file: " + path);
    f << to_text();
    if (!f) throw std::runtime_error("failed writing topology file: " + path);
}

}  // namespace fogsim
