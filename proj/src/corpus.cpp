// SPDX-License-Identifier: Apache-2.0
#include "ltrr/corpus.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace ltrr {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_string(QueryType t) {
    switch (t) {
        case QueryType::factoid: return "factoid";
        case QueryType::multi_aspect: return "multi-aspect";
        case QueryType::comparison: return "comparison";
        case QueryType::complex_type: return "complex";
        case QueryType::open_ended: return "open-ended";
        case QueryType::other: return "other";
    }
    throw std::logic_error("unreachable query type");
}

QueryType query_type_from_string(const std::string& s) {
    if (s == "factoid") return QueryType::factoid;
    if (s == "multi-aspect") return QueryType::multi_aspect;
    if (s == "comparison") return QueryType::comparison;
    if (s == "complex") return QueryType::complex_type;
    if (s == "open-ended") return QueryType::open_ended;
    if (s == "other") return QueryType::other;
    throw std::invalid_argument("unknown query type: " + s);
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error(path + ": malformed record at line " + std::to_string(lineno));
    }
    return j;
}

std::string required_string(const json& j, const char* field, const std::string& path,
                            std::size_t lineno) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw std::runtime_error(path + ": malformed record at line " + std::to_string(lineno) +
                                 " (missing field '" + field + "')");
    }
    return j.at(field).get<std::string>();
}

}  // namespace

std::vector<CorpusRecord> ingest_documents(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<CorpusRecord> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, path, lineno);
        CorpusRecord rec;
        rec.id = required_string(j, "id", path, lineno);
        rec.text = required_string(j, "text", path, lineno);
        if (rec.id.empty() || rec.text.empty()) {
            throw std::runtime_error(path + ": empty id or text at line " + std::to_string(lineno));
        }
        if (!seen.insert(rec.id).second) {
            throw std::runtime_error(path + ": duplicate id \"" + rec.id + "\"");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<QueryRecord> ingest_queries(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<QueryRecord> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, path, lineno);
        QueryRecord rec;
        rec.id = required_string(j, "id", path, lineno);
        rec.text = required_string(j, "text", path, lineno);
        rec.gold_answer = required_string(j, "gold_answer", path, lineno);
        rec.query_type = query_type_from_string(required_string(j, "query_type", path, lineno));
        if (j.contains("no_ret_utility") && !j.at("no_ret_utility").is_null()) {
            double u = j.at("no_ret_utility").get<double>();
            if (u < 0.0 || u > 1.0) {
                throw std::runtime_error(path + ": no_ret_utility out of [0,1] at line " +
                                         std::to_string(lineno));
            }
            rec.no_ret_utility = u;
        }
        if (rec.id.empty() || rec.text.empty()) {
            throw std::runtime_error(path + ": empty id or text at line " + std::to_string(lineno));
        }
        if (!seen.insert(rec.id).second) {
            throw std::runtime_error(path + ": duplicate id \"" + rec.id + "\"");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void write_documents(const std::vector<CorpusRecord>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& d : docs) {
        ojson j;
        j["id"] = d.id;
        j["text"] = d.text;
        out << j.dump() << '\n';
    }
}

void write_queries(const std::vector<QueryRecord>& queries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& q : queries) {
        ojson j;
        j["id"] = q.id;
        j["text"] = q.text;
        j["gold_answer"] = q.gold_answer;
        j["query_type"] = to_string(q.query_type);
        if (q.no_ret_utility) j["no_ret_utility"] = *q.no_ret_utility;
        out << j.dump() << '\n';
    }
}

void write_splits(const std::vector<DatasetSplit>& splits, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    write_splits(splits, out);
}

void write_splits(const std::vector<DatasetSplit>& splits, std::ostream& out) {
    for (const auto& s : splits) {
        ojson j;
        j["name"] = s.name;
        j["train_ids"] = s.train_ids;
        j["test_ids"] = s.test_ids;
        out << j.dump() << '\n';
    }
}

std::vector<DatasetSplit> read_splits(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<DatasetSplit> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, path, lineno);
        if (j.contains("artifact")) continue;  // pipeline header record
        DatasetSplit s;
        s.name = j.at("name").get<std::string>();
        s.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        s.test_ids = j.at("test_ids").get<std::vector<std::string>>();
        out.push_back(std::move(s));
    }
    return out;
}

SplitScheme parse_split_scheme(const std::string& s) {
    SplitScheme scheme;
    if (s == "balanced") {
        scheme.kind = SplitScheme::Kind::balanced;
        return scheme;
    }
    if (s.rfind("unseen:", 0) == 0) {
        scheme.kind = SplitScheme::Kind::unseen;
        scheme.held_out = query_type_from_string(s.substr(7));
        return scheme;
    }
    throw std::invalid_argument("unknown split scheme: " + s);
}

DatasetSplit make_splits(const std::vector<QueryRecord>& queries, const SplitScheme& scheme,
                         double ratio, std::uint64_t seed) {
    if (queries.empty()) throw std::invalid_argument("make_splits: empty query collection");
    DatasetSplit out;
    if (scheme.kind == SplitScheme::Kind::unseen) {
        out.name = "unseen:" + to_string(scheme.held_out);
        for (const auto& q : queries) {
            if (q.query_type == scheme.held_out) out.test_ids.push_back(q.id);
            else out.train_ids.push_back(q.id);
        }
        if (out.test_ids.empty()) {
            throw std::invalid_argument("make_splits: no query of held-out type " +
                                        to_string(scheme.held_out));
        }
        return out;
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("make_splits: ratio must be in (0,1)");
    }
    out.name = "balanced";
    // Stratify by query_type, shuffle each stratum, floor the test count.
    std::map<std::string, std::vector<std::string>> strata;
    for (const auto& q : queries) strata[to_string(q.query_type)].push_back(q.id);
    std::mt19937_64 rng(seed);
    for (auto& [type, ids] : strata) {
        std::shuffle(ids.begin(), ids.end(), rng);
        // n - floor(ratio*n) overstates the test share when ratio*n is exact;
        // nudge before flooring so e.g. (1-0.8)*10 lands on 2, not 1
        auto n_test = static_cast<std::size_t>(
            std::floor((1.0 - ratio) * static_cast<double>(ids.size()) + 1e-9));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i < n_test) out.test_ids.push_back(ids[i]);
            else out.train_ids.push_back(ids[i]);
        }
    }
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    return out;
}

}  // namespace ltrr
