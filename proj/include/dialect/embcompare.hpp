#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialect/affinity.hpp"
#include "dialect/region.hpp"
#include "dialect/sparse.hpp"

namespace dialect {

/// Word vectors of one region, stored row-major.
class EmbeddingTable {
public:
    EmbeddingTable(RegionCode region, std::size_t dim);

    /// Rejects malformed vectors and duplicate tokens with std::invalid_argument.
    void add(std::string token, std::span<const double> vector);

    const RegionCode& region() const noexcept { return region_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::span<const double> vector(std::size_t row) const {
        return std::span<const double>(data_).subspan(row * dim_, dim_);
    }
    std::optional<std::size_t> find(std::string_view token) const;

private:
    RegionCode region_;
    std::size_t dim_;
    std::vector<std::string> tokens_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> rows_;
};

struct EmbeddingLoadReport {
    std::size_t rows = 0;
    std::size_t zero_vectors_skipped = 0;
    std::size_t duplicates_skipped = 0;
};

/// Reads the text vector format: a "count dim" header line, then one
/// "token v1 ... v_dim" line per token. Throws ParseError naming the line on
/// any malformed row or a row count that disagrees with the header.
EmbeddingTable parse_embeddings(std::istream& in, RegionCode region,
                                const std::string& source_name = "<stream>",
                                EmbeddingLoadReport* report = nullptr);
EmbeddingTable load_embeddings(const std::filesystem::path& path, RegionCode region,
                               EmbeddingLoadReport* report = nullptr);

/// Writes the text vector format with round-trip exact values.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

/// Tokens present in at least `min_regions` tables, in lexicographic order.
class CommonTokenSet {
public:
    CommonTokenSet(std::vector<std::string> sorted_tokens, std::size_t min_regions);

    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t min_regions() const noexcept { return min_regions_; }
    std::optional<std::uint32_t> id(std::string_view token) const;
    bool operator==(const CommonTokenSet& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::size_t min_regions_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

inline constexpr std::size_t kDefaultMinRegions = 5;
inline constexpr std::size_t kDefaultNeighbors = 33;

/// Throws std::invalid_argument unless 1 <= min_regions <= tables.size(), and
/// std::runtime_error when no token qualifies.
std::shared_ptr<const CommonTokenSet> common_tokens(std::span<const EmbeddingTable> tables,
                                                    std::size_t min_regions = kDefaultMinRegions);

struct Neighbor {
    /// Id in the common token set.
    std::uint32_t id = 0;
    /// Cosine distance in [0, 2].
    double distance = 0.0;
    bool operator==(const Neighbor&) const = default;
};

/// k nearest neighbors of every common token present in a table, among the
/// other present common tokens. Lists are ascending by distance, ties broken
/// by token order.
struct KnnGraph {
    RegionCode region;
    std::size_t k = 0;
    std::shared_ptr<const CommonTokenSet> universe;
    /// Common-set ids of the query tokens, ascending.
    std::vector<std::uint32_t> queries;
    /// queries.size() × k, row per query.
    std::vector<Neighbor> neighbors;

    std::span<const Neighbor> neighbors_of(std::size_t query_row) const {
        return std::span<const Neighbor>(neighbors).subspan(query_row * k, k);
    }
};

/// Blocked, multi-threaded exact search. Produces the same graph as
/// knn_graph_bruteforce for any thread count. Throws std::invalid_argument
/// when fewer than k + 1 common tokens are present in the table.
KnnGraph knn_graph(const EmbeddingTable& table, std::shared_ptr<const CommonTokenSet> common,
                   std::size_t k = kDefaultNeighbors, std::size_t threads = 1);

/// Reference search: full sort of every query's distance list.
KnnGraph knn_graph_bruteforce(const EmbeddingTable& table,
                              std::shared_ptr<const CommonTokenSet> common,
                              std::size_t k = kDefaultNeighbors);

/// 0.5 + 1 / (1 + d): closer neighbors weigh more, in (5/6, 1.5] for d in [0, 2].
inline double neighbor_weight(double distance) noexcept { return 0.5 + 1.0 / (1.0 + distance); }

inline std::uint64_t signature_key(std::uint32_t token, std::uint32_t neighbor) noexcept {
    return (std::uint64_t(token) << 32) | neighbor;
}

/// Sparse (token, neighbor) -> weight flattening of a kNN graph.
struct RegionSignature {
    RegionCode region;
    std::shared_ptr<const CommonTokenSet> universe;
    SparseVector entries;

    /// "token<TAB>neighbor<TAB>weight" lines in key order.
    std::string to_tsv() const;
};

RegionSignature signature(const KnnGraph& graph);

/// Pairwise cosine distance between signatures. Empty signatures are excluded.
/// Throws std::invalid_argument with fewer than two signatures or when their
/// token universes differ.
AffinityResult semantic_affinity(std::span<const RegionSignature> signatures,
                                 std::size_t threads = 1);

}  // namespace dialect
