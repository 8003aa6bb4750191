// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ltrr {

enum class QueryType { factoid, multi_aspect, comparison, complex_type, open_ended, other };

std::string to_string(QueryType t);
QueryType query_type_from_string(const std::string& s);

struct CorpusRecord {
    std::string id;
    std::string text;
};

struct QueryRecord {
    std::string id;
    std::string text;
    std::string gold_answer;
    QueryType query_type = QueryType::other;
    std::optional<double> no_ret_utility;  // overrides the oracle's no-retrieval utility
};

struct DatasetSplit {
    std::string name;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

/// Line-delimited JSON ingestion. Rejects duplicate ids (naming the id) and
/// malformed lines (naming the 1-based line number). File order is preserved.
std::vector<CorpusRecord> ingest_documents(const std::string& path);
std::vector<QueryRecord> ingest_queries(const std::string& path);

void write_documents(const std::vector<CorpusRecord>& docs, const std::string& path);
void write_queries(const std::vector<QueryRecord>& queries, const std::string& path);

void write_splits(const std::vector<DatasetSplit>& splits, const std::string& path);
void write_splits(const std::vector<DatasetSplit>& splits, std::ostream& out);
std::vector<DatasetSplit> read_splits(const std::string& path);

struct SplitScheme {
    enum class Kind { balanced, unseen } kind = Kind::balanced;
    QueryType held_out = QueryType::other;  // only for unseen
};

/// Parses "balanced" or "unseen:<type>".
SplitScheme parse_split_scheme(const std::string& s);

/// Balanced: stratified by query_type, per-stratum test count = floor((1-ratio)*n),
/// leftover goes to train. Unseen:<T>: test = exactly the type-T queries.
/// Deterministic given seed.
DatasetSplit make_splits(const std::vector<QueryRecord>& queries, const SplitScheme& scheme,
                         double ratio, std::uint64_t seed);

}  // namespace ltrr
