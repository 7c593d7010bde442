#include "dialect/embcompare.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <queue>
#include <stdexcept>

#include "dialect/io.hpp"
#include "dialect/parallel.hpp"

namespace dialect {

EmbeddingTable::EmbeddingTable(RegionCode region, std::size_t dim)
    : region_(std::move(region)), dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string token, std::span<const double> vector) {
    if (vector.size() != dim_) {
        throw std::invalid_argument("vector for '" + token + "' has " +
                                    std::to_string(vector.size()) + " values, expected " +
                                    std::to_string(dim_));
    }
    if (std::all_of(vector.begin(), vector.end(), [](double v) { return v == 0.0; })) {
        throw std::invalid_argument("zero vector for '" + token + "'");
    }
    if (rows_.count(token)) throw std::invalid_argument("duplicate token '" + token + "'");
    rows_.emplace(token, tokens_.size());
    tokens_.push_back(std::move(token));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
    auto it = rows_.find(std::string(token));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in, RegionCode region,
                                const std::string& source_name, EmbeddingLoadReport* report) {
    std::string line;
    std::uint64_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source_name, 1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    std::size_t count = 0, dim = 0;
    if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
        dim == 0) {
        throw ParseError(source_name, line_no, "expected header \"count dim\"");
    }

    EmbeddingTable table(std::move(region), dim);
    EmbeddingLoadReport local;
    std::vector<double> values(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != dim + 1) {
            throw ParseError(source_name, line_no,
                             "expected " + std::to_string(dim) + " values, found " +
                                 std::to_string(fields.size() - 1));
        }
        for (std::size_t d = 0; d < dim; ++d) {
            if (!parse_number(fields[d + 1], values[d]) || !std::isfinite(values[d])) {
                throw ParseError(source_name, line_no,
                                 "bad number '" + std::string(fields[d + 1]) + "'");
            }
        }
        ++local.rows;
        const std::string token(fields[0]);
        if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) {
            ++local.zero_vectors_skipped;
        } else if (table.find(token)) {
            ++local.duplicates_skipped;
        } else {
            table.add(token, values);
        }
    }
    if (local.rows != count) {
        throw ParseError(source_name, line_no,
                         "header declares " + std::to_string(count) + " rows, found " +
                             std::to_string(local.rows));
    }
    if (report) *report = local;
    return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, RegionCode region,
                               EmbeddingLoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_embeddings(in, std::move(region), path.string(), report);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
    out << table.size() << ' ' << table.dim() << '\n';
    char buf[32];
    for (std::size_t r = 0; r < table.size(); ++r) {
        out << table.tokens()[r];
        for (double v : table.vector(r)) {
            std::snprintf(buf, sizeof(buf), " %.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
    AtomicFileWriter w(path);
    write_embeddings(w.stream(), table);
    w.commit();
}

CommonTokenSet::CommonTokenSet(std::vector<std::string> sorted_tokens, std::size_t min_regions)
    : tokens_(std::move(sorted_tokens)), min_regions_(min_regions) {
    if (!std::is_sorted(tokens_.begin(), tokens_.end()) ||
        std::adjacent_find(tokens_.begin(), tokens_.end()) != tokens_.end()) {
        throw std::invalid_argument("common token set must be sorted and unique");
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        ids_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> CommonTokenSet::id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::shared_ptr<const CommonTokenSet> common_tokens(std::span<const EmbeddingTable> tables,
                                                    std::size_t min_regions) {
    if (min_regions < 1 || min_regions > tables.size()) {
        throw std::invalid_argument("common_tokens: min_regions must be in [1, " +
                                    std::to_string(tables.size()) + "]");
    }
    std::map<std::string_view, std::size_t> membership;
    for (const auto& t : tables) {
        for (const auto& token : t.tokens()) ++membership[token];
    }
    std::vector<std::string> kept;
    for (const auto& [token, n] : membership) {
        if (n >= min_regions) kept.emplace_back(token);
    }
    if (kept.empty()) throw std::runtime_error("common_tokens: no token reaches min_regions");
    return std::make_shared<const CommonTokenSet>(std::move(kept), min_regions);
}

namespace {

// Unit-length rows of the common tokens present in a table, ascending by id.
struct UnitRows {
    std::vector<std::uint32_t> ids;
    std::vector<double> data;
    std::size_t dim = 0;

    const double* row(std::size_t i) const { return data.data() + i * dim; }
};

UnitRows unit_rows(const EmbeddingTable& table, const CommonTokenSet& common) {
    UnitRows rows;
    rows.dim = table.dim();
    for (std::uint32_t id = 0; id < common.size(); ++id) {
        auto r = table.find(common.tokens()[id]);
        if (!r) continue;
        auto v = table.vector(*r);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        rows.ids.push_back(id);
        for (double x : v) rows.data.push_back(x / norm);
    }
    return rows;
}

inline double unit_distance(const double* a, const double* b, std::size_t dim) noexcept {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += a[d] * b[d];
    return std::clamp(1.0 - s, 0.0, 2.0);
}

// Candidate order: distance, then row (row order is token order).
struct Candidate {
    double distance;
    std::uint32_t row;
    bool operator<(const Candidate& o) const {
        return distance != o.distance ? distance < o.distance : row < o.row;
    }
};

KnnGraph empty_graph(const EmbeddingTable& table, std::shared_ptr<const CommonTokenSet> common,
                     std::size_t k, const UnitRows& rows) {
    if (k < 1) throw std::invalid_argument("knn_graph: k must be >= 1");
    if (rows.ids.size() < k + 1) {
        throw std::invalid_argument("knn_graph: region " + table.region().str() + " has " +
                                    std::to_string(rows.ids.size()) +
                                    " common tokens, need at least k + 1 = " +
                                    std::to_string(k + 1));
    }
    KnnGraph g;
    g.region = table.region();
    g.k = k;
    g.universe = std::move(common);
    g.queries = rows.ids;
    g.neighbors.resize(rows.ids.size() * k);
    return g;
}

}  // namespace

KnnGraph knn_graph_bruteforce(const EmbeddingTable& table,
                              std::shared_ptr<const CommonTokenSet> common, std::size_t k) {
    if (!common) throw std::invalid_argument("knn_graph: null common token set");
    const UnitRows rows = unit_rows(table, *common);
    KnnGraph g = empty_graph(table, std::move(common), k, rows);
    const std::size_t n = rows.ids.size();
    std::vector<Candidate> all;
    for (std::size_t q = 0; q < n; ++q) {
        all.clear();
        for (std::size_t c = 0; c < n; ++c) {
            if (c == q) continue;
            all.push_back({unit_distance(rows.row(q), rows.row(c), rows.dim),
                           static_cast<std::uint32_t>(c)});
        }
        std::sort(all.begin(), all.end());
        for (std::size_t j = 0; j < k; ++j) {
            g.neighbors[q * k + j] = {rows.ids[all[j].row], all[j].distance};
        }
    }
    return g;
}

KnnGraph knn_graph(const EmbeddingTable& table, std::shared_ptr<const CommonTokenSet> common,
                   std::size_t k, std::size_t threads) {
    if (!common) throw std::invalid_argument("knn_graph: null common token set");
    const UnitRows rows = unit_rows(table, *common);
    KnnGraph g = empty_graph(table, std::move(common), k, rows);
    const std::size_t n = rows.ids.size();
    constexpr std::size_t kQueryBlock = 16;
    constexpr std::size_t kCandidateBlock = 256;
    const std::size_t blocks = (n + kQueryBlock - 1) / kQueryBlock;

    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t q0 = b * kQueryBlock;
        const std::size_t q1 = std::min(n, q0 + kQueryBlock);
        // Max-heaps of the best k so far, one per query of the block.
        std::vector<std::priority_queue<Candidate>> best(q1 - q0);
        for (std::size_t c0 = 0; c0 < n; c0 += kCandidateBlock) {
            const std::size_t c1 = std::min(n, c0 + kCandidateBlock);
            for (std::size_t q = q0; q < q1; ++q) {
                auto& heap = best[q - q0];
                const double* qrow = rows.row(q);
                for (std::size_t c = c0; c < c1; ++c) {
                    if (c == q) continue;
                    const Candidate cand{unit_distance(qrow, rows.row(c), rows.dim),
                                         static_cast<std::uint32_t>(c)};
                    if (heap.size() < k) {
                        heap.push(cand);
                    } else if (cand < heap.top()) {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
        }
        for (std::size_t q = q0; q < q1; ++q) {
            auto& heap = best[q - q0];
            for (std::size_t j = k; j-- > 0;) {
                g.neighbors[q * k + j] = {rows.ids[heap.top().row], heap.top().distance};
                heap.pop();
            }
        }
    });
    return g;
}

RegionSignature signature(const KnnGraph& graph) {
    std::vector<SparseVector::Entry> entries;
    entries.reserve(graph.neighbors.size());
    for (std::size_t q = 0; q < graph.queries.size(); ++q) {
        for (const auto& nb : graph.neighbors_of(q)) {
            entries.emplace_back(signature_key(graph.queries[q], nb.id),
                                 neighbor_weight(nb.distance));
        }
    }
    return {graph.region, graph.universe, SparseVector(std::move(entries))};
}

std::string RegionSignature::to_tsv() const {
    std::string out;
    char buf[32];
    for (const auto& [key, w] : entries.entries()) {
        const auto token = static_cast<std::uint32_t>(key >> 32);
        const auto neighbor = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
        std::snprintf(buf, sizeof(buf), "%.9f", w);
        out += universe->tokens().at(token);
        out += '\t';
        out += universe->tokens().at(neighbor);
        out += '\t';
        out += buf;
        out += '\n';
    }
    return out;
}

AffinityResult semantic_affinity(std::span<const RegionSignature> signatures,
                                 std::size_t threads) {
    if (signatures.size() < 2) throw std::invalid_argument("semantic_affinity: need >= 2 regions");
    const auto& universe = signatures.front().universe;
    std::vector<RegionCode> labels;
    std::vector<SparseVector> vectors;
    for (const auto& s : signatures) {
        if (!s.universe || !universe ||
            (s.universe != universe && !(*s.universe == *universe))) {
            throw std::invalid_argument("semantic_affinity: signatures use different token sets");
        }
        labels.push_back(s.region);
        vectors.push_back(s.entries);
    }
    return pairwise_cosine_affinity(labels, vectors, threads);
}

}  // namespace dialect
