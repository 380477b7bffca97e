#include "mrfx/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mrfx/errors.hpp"

namespace mrfx {

namespace {

std::string loc(const std::filesystem::path& path, int line) {
    return path.string() + ":" + std::to_string(line);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool skippable(const std::string& line) {
    return line.empty() || line[0] == '#';
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

long parse_int(const std::string& tok, const std::filesystem::path& path, int line) {
    std::size_t pos = 0;
    long value = 0;
    try {
        value = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(loc(path, line) + ": expected an integer, got '" + tok + "'");
    }
    if (pos != tok.size() || value < 0) {
        throw ParseError(loc(path, line) + ": expected a non-negative integer, got '" + tok + "'");
    }
    return value;
}

double parse_double(const std::string& tok, const std::filesystem::path& path, int line) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(loc(path, line) + ": expected a number, got '" + tok + "'");
    }
    if (pos != tok.size()) {
        throw ParseError(loc(path, line) + ": trailing characters after number in '" + tok + "'");
    }
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return in;
}

struct RawPriors {
    int classes = 0;
    std::map<NodeId, Distribution> rows;
    NodeId max_node = -1;
};

RawPriors read_priors(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    RawPriors out;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (skippable(line)) continue;
        std::vector<std::string> fields = split(line, ',');
        if (!header_seen) {
            if (fields.size() < 3 || fields[0] != "node") {
                throw ParseError(loc(path, lineno) + ": expected header 'node,p_0,...,p_{c-1}'");
            }
            for (std::size_t i = 1; i < fields.size(); ++i) {
                if (fields[i] != "p_" + std::to_string(i - 1)) {
                    throw ParseError(loc(path, lineno) + ": bad header column '" + fields[i] + "'");
                }
            }
            out.classes = static_cast<int>(fields.size()) - 1;
            header_seen = true;
            continue;
        }
        if (fields.size() != static_cast<std::size_t>(out.classes) + 1) {
            throw ParseError(loc(path, lineno) + ": expected " + std::to_string(out.classes + 1) +
                             " fields, got " + std::to_string(fields.size()));
        }
        NodeId node = static_cast<NodeId>(parse_int(fields[0], path, lineno));
        std::vector<double> probs;
        probs.reserve(static_cast<std::size_t>(out.classes));
        for (int i = 0; i < out.classes; ++i) {
            probs.push_back(parse_double(fields[static_cast<std::size_t>(i) + 1], path, lineno));
        }
        if (!out.rows.emplace(node, Distribution(std::move(probs))).second) {
            throw ParseError(loc(path, lineno) + ": duplicate prior row for node " + std::to_string(node));
        }
        out.max_node = std::max(out.max_node, node);
    }
    if (!header_seen) {
        throw ParseError(path.string() + ": missing header 'node,p_0,...,p_{c-1}'");
    }
    return out;
}

struct RawPotentials {
    int classes = 0;
    bool global = false;
    CompatibilityMatrix global_matrix;
    // canonical (min,max) pair -> (matrix, declared-first endpoint)
    std::map<std::pair<NodeId, NodeId>, std::pair<CompatibilityMatrix, NodeId>> per_edge;
};

RawPotentials read_potentials(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    RawPotentials out;
    std::string line;
    int lineno = 0;

    auto next_content = [&](std::string& target) -> bool {
        while (std::getline(in, target)) {
            ++lineno;
            target = trim(target);
            if (!skippable(target)) return true;
        }
        return false;
    };

    std::string content;
    if (!next_content(content)) {
        throw ParseError(path.string() + ": empty potentials file");
    }
    {
        std::istringstream ss(content);
        std::string kw, value, extra;
        ss >> kw >> value;
        if (kw != "classes" || value.empty() || (ss >> extra)) {
            throw ParseError(loc(path, lineno) + ": expected 'classes <c>' first");
        }
        out.classes = static_cast<int>(parse_int(value, path, lineno));
        if (out.classes < 2) {
            throw ParseError(loc(path, lineno) + ": class count must be at least 2");
        }
    }

    auto read_matrix = [&]() {
        CompatibilityMatrix m;
        m.classes = out.classes;
        m.entries.reserve(static_cast<std::size_t>(out.classes) * out.classes);
        for (int r = 0; r < out.classes; ++r) {
            std::string row;
            if (!next_content(row)) {
                throw ParseError(loc(path, lineno) + ": truncated potential matrix");
            }
            std::istringstream ss(row);
            std::string tok;
            int fields = 0;
            while (ss >> tok) {
                m.entries.push_back(parse_double(tok, path, lineno));
                ++fields;
            }
            if (fields != out.classes) {
                throw ParseError(loc(path, lineno) + ": expected " + std::to_string(out.classes) +
                                 " entries in matrix row, got " + std::to_string(fields));
            }
        }
        return m;
    };

    while (next_content(content)) {
        std::istringstream ss(content);
        std::string kw, key, extra;
        ss >> kw >> key;
        if (kw != "potential" || key.empty() || (ss >> extra)) {
            throw ParseError(loc(path, lineno) + ": expected 'potential global' or 'potential u,v'");
        }
        if (key == "global") {
            if (out.global || !out.per_edge.empty()) {
                throw ParseError(loc(path, lineno) + ": mixing global and per-edge potentials");
            }
            out.global = true;
            out.global_matrix = read_matrix();
        } else {
            if (out.global) {
                throw ParseError(loc(path, lineno) + ": mixing global and per-edge potentials");
            }
            std::vector<std::string> parts = split(key, ',');
            if (parts.size() != 2) {
                throw ParseError(loc(path, lineno) + ": bad potential key '" + key + "'");
            }
            int key_line = lineno;
            NodeId u = static_cast<NodeId>(parse_int(parts[0], path, key_line));
            NodeId v = static_cast<NodeId>(parse_int(parts[1], path, key_line));
            auto canon = std::make_pair(std::min(u, v), std::max(u, v));
            CompatibilityMatrix m = read_matrix();
            if (!out.per_edge.emplace(canon, std::make_pair(std::move(m), u)).second) {
                throw ParseError(loc(path, key_line) + ": duplicate potential for edge " + key);
            }
        }
    }
    if (!out.global && out.per_edge.empty()) {
        throw ParseError(path.string() + ": no potential blocks found");
    }
    return out;
}

CompatibilityMatrix transpose(const CompatibilityMatrix& m) {
    CompatibilityMatrix t = m;
    for (int a = 0; a < m.classes; ++a) {
        for (int b = 0; b < m.classes; ++b) t.at(a, b) = m.at(b, a);
    }
    return t;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Mrf load_mrf(const std::filesystem::path& graph_path, const std::filesystem::path& priors_path,
             const std::filesystem::path& potentials_path) {
    std::vector<Edge> edges;
    NodeId max_node = -1;
    {
        std::ifstream in = open_input(graph_path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = trim(line);
            if (skippable(line)) continue;
            std::istringstream ss(line);
            std::string a, b, extra;
            ss >> a >> b;
            if (b.empty() || (ss >> extra)) {
                throw ParseError(loc(graph_path, lineno) + ": expected 'u v'");
            }
            Edge e;
            e.u = static_cast<NodeId>(parse_int(a, graph_path, lineno));
            e.v = static_cast<NodeId>(parse_int(b, graph_path, lineno));
            edges.push_back(e);
            max_node = std::max({max_node, e.u, e.v});
        }
    }

    RawPriors priors = read_priors(priors_path);
    RawPotentials pots = read_potentials(potentials_path);
    if (priors.classes != pots.classes) {
        throw ValidationError("class count mismatch: priors declare " + std::to_string(priors.classes) +
                              ", potentials declare " + std::to_string(pots.classes));
    }
    const int c = pots.classes;
    max_node = std::max(max_node, priors.max_node);
    if (max_node < 0) {
        throw ValidationError("no nodes found: graph has no edges and priors list no rows");
    }
    const int n = max_node + 1;

    std::vector<Distribution> prior_vec(static_cast<std::size_t>(n), Distribution::uniform(c));
    for (auto& [node, dist] : priors.rows) {
        prior_vec[static_cast<std::size_t>(node)] = dist;
    }

    std::vector<CompatibilityMatrix> potentials;
    potentials.reserve(edges.size());
    if (pots.global) {
        potentials.assign(edges.size(), pots.global_matrix);
    } else {
        std::size_t used = 0;
        for (const Edge& e : edges) {
            auto canon = std::make_pair(std::min(e.u, e.v), std::max(e.u, e.v));
            auto it = pots.per_edge.find(canon);
            if (it == pots.per_edge.end()) {
                throw ValidationError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                      ") has no potential");
            }
            // Matrix stored in key order; flip if the edge declares the
            // endpoints the other way around.
            potentials.push_back(it->second.second == e.u ? it->second.first : transpose(it->second.first));
            ++used;
        }
        if (used != pots.per_edge.size()) {
            for (const auto& [canon, value] : pots.per_edge) {
                bool found = false;
                for (const Edge& e : edges) {
                    if (canon == std::make_pair(std::min(e.u, e.v), std::max(e.u, e.v))) {
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw ValidationError("potential declared for unknown edge (" + std::to_string(canon.first) +
                                          "," + std::to_string(canon.second) + ")");
                }
            }
        }
    }

    return Mrf(c, std::move(prior_vec), std::move(edges), std::move(potentials));
}

void save_mrf(const Mrf& mrf, const std::filesystem::path& graph_path,
              const std::filesystem::path& priors_path, const std::filesystem::path& potentials_path) {
    {
        std::ofstream out(graph_path);
        if (!out) throw Error("cannot write " + graph_path.string());
        for (const Edge& e : mrf.edges()) {
            out << e.u << " " << e.v << "\n";
        }
    }
    {
        std::ofstream out(priors_path);
        if (!out) throw Error("cannot write " + priors_path.string());
        out << "node";
        for (int i = 0; i < mrf.class_count(); ++i) out << ",p_" << i;
        out << "\n";
        for (NodeId n = 0; n < mrf.node_count(); ++n) {
            out << n;
            for (double v : mrf.prior(n).probs) out << "," << fmt(v);
            out << "\n";
        }
    }
    {
        std::ofstream out(potentials_path);
        if (!out) throw Error("cannot write " + potentials_path.string());
        out << "classes " << mrf.class_count() << "\n";
        bool shared = mrf.edge_count() > 0;
        for (EdgeId e = 1; e < mrf.edge_count(); ++e) {
            if (mrf.potential(e).entries != mrf.potential(0).entries) {
                shared = false;
                break;
            }
        }
        auto write_matrix = [&](const CompatibilityMatrix& m) {
            for (int a = 0; a < m.classes; ++a) {
                for (int b = 0; b < m.classes; ++b) {
                    out << (b ? " " : "") << fmt(m.at(a, b));
                }
                out << "\n";
            }
        };
        if (shared) {
            out << "potential global\n";
            write_matrix(mrf.potential(0));
        } else {
            for (EdgeId e = 0; e < mrf.edge_count(); ++e) {
                const Edge& ed = mrf.edge(e);
                out << "potential " << ed.u << "," << ed.v << "\n";
                write_matrix(mrf.potential(e));
            }
            if (mrf.edge_count() == 0) {
                // Degenerate edgeless graph still needs a parsable file.
                out << "potential global\n";
                write_matrix(CompatibilityMatrix::constant(mrf.class_count(), 1.0));
            }
        }
    }
}

} // namespace mrfx
