#include "kronrev/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace kronrev {

namespace {

json cplx_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Format, "complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json block_to_json(const PhaseBlock& b) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
        json row = json::array();
        for (int k = 0; k < 3; ++k) row.push_back(cplx_to_json(b(i, k)));
        rows.push_back(row);
    }
    return rows;
}

PhaseBlock block_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Format, "phase block must be a 3x3 array");
    PhaseBlock b;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_array() || j[i].size() != 3) throw Error(ErrorKind::Format, "phase block row must have 3 entries");
        for (int k = 0; k < 3; ++k) b(i, k) = cplx_from_json(j[i][k]);
    }
    return b;
}

json matrix_to_json(const BlockMatrix& a) {
    json blocks = json::array();
    for (int j = 0; j < a.n(); ++j)
        for (int k = 0; k < a.n(); ++k) blocks.push_back(block_to_json(a.block(j, k)));
    return {{"n", a.n()}, {"blocks", blocks}};
}

BlockMatrix matrix_from_json(const json& j) {
    try {
        const int n = j.at("n").get<int>();
        const json& blocks = j.at("blocks");
        if (n < 0 || !blocks.is_array() || static_cast<int>(blocks.size()) != n * n)
            throw Error(ErrorKind::Format, "block matrix needs n*n blocks");
        BlockMatrix a(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a.set(r, c, block_from_json(blocks[r * n + c]));
        return a;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, e.what());
    }
}

json network_to_json(const RadialNetwork& net) {
    json nodes = json::array();
    for (const auto& n : net.nodes)
        nodes.push_back({{"id", n.id}, {"role", n.role == Role::Measured ? "measured" : "hidden"}});
    json edges = json::array();
    for (const auto& e : net.edges) {
        json je = {{"j", e.j}, {"k", e.k}, {"y", block_to_json(e.y)}};
        if (e.lambda) je["lambda"] = *e.lambda;
        edges.push_back(je);
    }
    json out = {{"nodes", nodes}, {"edges", edges}};
    if (net.y_unit) out["y_unit"] = block_to_json(*net.y_unit);
    return out;
}

RadialNetwork network_from_json(const json& j) {
    try {
        RadialNetwork net;
        for (const auto& n : j.at("nodes")) {
            const std::string role = n.at("role").get<std::string>();
            if (role != "measured" && role != "hidden") throw Error(ErrorKind::Format, "unknown role " + role);
            net.nodes.push_back({n.at("id").get<int>(), role == "measured" ? Role::Measured : Role::Hidden});
        }
        for (const auto& e : j.at("edges")) {
            Edge edge{e.at("j").get<int>(), e.at("k").get<int>(), block_from_json(e.at("y")), std::nullopt};
            if (e.contains("lambda")) edge.lambda = e["lambda"].get<double>();
            net.edges.push_back(edge);
        }
        if (j.contains("y_unit")) net.y_unit = block_from_json(j["y_unit"]);
        return net;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, e.what());
    }
}

json trace_to_json(const std::vector<KronState>& trace) {
    json out = json::array();
    for (const auto& s : trace) {
        json ys = json::array();
        for (int i = 0; i < s.n_l(); ++i) ys.push_back({{"label", s.y_labels[i]}, {"y", block_to_json(s.y_stack[i])}});
        json ids = json::array();
        for (const auto& id : s.node_ids) ids.push_back(id.label);
        out.push_back({{"l", s.l},
                       {"clique_start", s.clique_start},
                       {"alpha", block_to_json(s.alpha)},
                       {"y_stack", ys},
                       {"perm", s.perm.map()},
                       {"node_ids", ids}});
    }
    return out;
}

json plan_to_json(const DecompositionPlan& plan) {
    json pieces = json::array();
    for (const auto& p : plan.pieces) {
        json att = json::array();
        for (const auto& a : p.attachments) {
            if (std::holds_alternative<Disconnected>(a)) {
                att.push_back({{"case", "disconnected"}});
            } else if (const auto* l = std::get_if<AdjacentLine>(&a)) {
                att.push_back({{"case", "adjacent_line"}, {"i", l->i}, {"j", l->j}, {"W12", block_to_json(l->W12)}});
            } else {
                att.push_back({{"case", "shared_node"}, {"label", std::get<SharedNode>(a).label}});
            }
        }
        pieces.push_back({{"members", p.members}, {"attachments", att}});
    }
    json trees = json::array();
    for (const auto& t : plan.trees) {
        json edges = json::array();
        for (auto [a, b] : t) edges.push_back({a, b});
        trees.push_back(edges);
    }
    return {{"partition",
             {{"measured_internal", plan.partition.measured_internal},
              {"measured_boundary", plan.partition.measured_boundary}}},
            {"pieces", pieces},
            {"trees", trees}};
}

void write_measurements_csv(std::ostream& os, const MeasurementSet& ms) {
    os << "t,node,phase,V_re,V_im,I_re,I_im\n";
    os.precision(17);
    for (int t = 0; t < ms.V1.rows(); ++t)
        for (int c = 0; c < ms.V1.cols(); ++c) {
            const cplx v = ms.V1(t, c), i = ms.I1(t, c);
            os << t << ',' << c / 3 + 1 << ',' << c % 3 << ',' << v.real() << ',' << v.imag() << ',' << i.real()
               << ',' << i.imag() << '\n';
        }
}

MeasurementSet read_measurements_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Format, "empty measurement file");
    struct Row {
        int t, node, phase;
        cplx v, i;
    };
    std::vector<Row> rows;
    int max_t = -1, max_node = 0;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": expected 7 fields");
        try {
            Row r{std::stoi(cells[0]), std::stoi(cells[1]), std::stoi(cells[2]),
                  {std::stod(cells[3]), std::stod(cells[4])}, {std::stod(cells[5]), std::stod(cells[6])}};
            if (r.t < 0 || r.node < 1 || r.phase < 0 || r.phase > 2)
                throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": index out of range");
            max_t = std::max(max_t, r.t);
            max_node = std::max(max_node, r.node);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": unparsable number");
        }
    }
    MeasurementSet ms;
    ms.T = max_t + 1;
    ms.V1 = DenseMatrix::Zero(ms.T, 3 * max_node);
    ms.I1 = DenseMatrix::Zero(ms.T, 3 * max_node);
    std::vector<char> seen(static_cast<size_t>(ms.T) * 3 * max_node, 0);
    for (const auto& r : rows) {
        const int c = 3 * (r.node - 1) + r.phase;
        seen[static_cast<size_t>(r.t) * 3 * max_node + c] = 1;
        ms.V1(r.t, c) = r.v;
        ms.I1(r.t, c) = r.i;
    }
    for (char s : seen)
        if (!s) throw Error(ErrorKind::Format, "measurement table has missing (t, node, phase) rows");
    return ms;
}

std::string reduction_to_dot(const BlockMatrix& ybar, double zero_tol) {
    const auto c = classify_from_reduction(ybar, zero_tol);
    std::ostringstream os;
    os << "graph G {\n  node [shape=circle, style=filled];\n";
    for (int l = 1; l <= ybar.n(); ++l)
        os << "  " << l << " [fillcolor=" << (c.partition.measured_boundary.count(l) ? "lightblue" : "white")
           << "];\n";
    for (size_t k = 0; k < c.cliques.size(); ++k) {
        os << "  subgraph cluster_" << k << " {\n    style=rounded; color=red; label=\"clique " << k + 1 << "\";\n";
        const auto& m = c.cliques[k];
        for (size_t a = 0; a < m.size(); ++a)
            for (size_t b = a + 1; b < m.size(); ++b) os << "    " << m[a] << " -- " << m[b] << ";\n";
        os << "  }\n";
    }
    for (auto [a, b] : c.tree_edges) os << "  " << a << " -- " << b << ";\n";
    os << "}\n";
    return os.str();
}

std::string network_to_dot(const RadialNetwork& net) {
    std::ostringstream os;
    os << "graph Y {\n  node [shape=circle, style=filled];\n";
    for (const auto& n : net.nodes)
        os << "  " << n.id << " [fillcolor=" << (n.role == Role::Measured ? "lightblue" : "gray") << "];\n";
    for (const auto& e : net.edges) os << "  " << e.j << " -- " << e.k << ";\n";
    os << "}\n";
    return os.str();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Format, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Format, "cannot write " + path);
    out << text;
}

}  // namespace kronrev
