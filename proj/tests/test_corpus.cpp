// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "ltrr/corpus.hpp"

using namespace ltrr;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << contents;
    return path;
}

std::vector<QueryRecord> typed_queries(const std::vector<std::pair<std::string, int>>& counts) {
    // counts: (type string, how many). Ids are globally unique and sortable.
    std::vector<QueryRecord> queries;
    int n = 0;
    for (const auto& [type, count] : counts) {
        for (int i = 0; i < count; ++i) {
            QueryRecord q;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "q%03d", n++);
            q.id = buf;
            q.text = "text for " + q.id;
            q.gold_answer = "answer";
            q.query_type = query_type_from_string(type);
            queries.push_back(q);
        }
    }
    return queries;
}

}  // namespace

TEST_CASE("document ingestion preserves file order") {
    auto path = temp_file("ltrr_docs.jsonl",
                          R"({"id":"d2","text":"second doc"})"
                          "\n"
                          R"({"id":"d1","text":"first doc"})"
                          "\n");
    auto docs = ingest_documents(path.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "d2");
    CHECK(docs[1].id == "d1");
    CHECK(docs[0].text == "second doc");
}

TEST_CASE("duplicate document id is rejected by name") {
    auto path = temp_file("ltrr_dup.jsonl",
                          R"({"id":"d1","text":"a"})"
                          "\n"
                          R"({"id":"d1","text":"b"})"
                          "\n");
    CHECK_THROWS_WITH_AS(ingest_documents(path.string()),
                         doctest::Contains("d1"), std::exception);
}

TEST_CASE("malformed line is rejected with its line number") {
    auto path = temp_file("ltrr_malformed.jsonl",
                          R"({"id":"d1","text":"a"})"
                          "\n"
                          "not json at all\n");
    CHECK_THROWS_WITH_AS(ingest_documents(path.string()),
                         doctest::Contains("line 2"), std::exception);
}

TEST_CASE("query ingestion reads all fields") {
    auto path = temp_file(
        "ltrr_queries.jsonl",
        R"({"id":"q1","text":"who wrote hamlet","gold_answer":"shakespeare","query_type":"factoid","no_ret_utility":0.3})"
        "\n"
        R"({"id":"q2","text":"compare x and y","gold_answer":"both","query_type":"comparison"})"
        "\n");
    auto queries = ingest_queries(path.string());
    REQUIRE(queries.size() == 2);
    CHECK(queries[0].query_type == QueryType::factoid);
    REQUIRE(queries[0].no_ret_utility.has_value());
    CHECK(*queries[0].no_ret_utility == doctest::Approx(0.3));
    CHECK_FALSE(queries[1].no_ret_utility.has_value());
    CHECK(queries[1].gold_answer == "both");
}

TEST_CASE("query type names round-trip") {
    for (const char* name : {"factoid", "multi-aspect", "comparison", "complex", "open-ended", "other"}) {
        CHECK(to_string(query_type_from_string(name)) == name);
    }
    CHECK_THROWS(query_type_from_string("multihop"));
}

TEST_CASE("split scheme parsing") {
    CHECK(parse_split_scheme("balanced").kind == SplitScheme::Kind::balanced);
    auto unseen = parse_split_scheme("unseen:comparison");
    CHECK(unseen.kind == SplitScheme::Kind::unseen);
    CHECK(unseen.held_out == QueryType::comparison);
    CHECK_THROWS(parse_split_scheme("random"));
    CHECK_THROWS(parse_split_scheme("unseen:nope"));
}

TEST_CASE("balanced split partitions the queries") {
    auto queries = typed_queries({{"factoid", 10}, {"comparison", 7}, {"complex", 4}});
    auto split = make_splits(queries, parse_split_scheme("balanced"), 0.8, 42);

    std::set<std::string> train(split.train_ids.begin(), split.train_ids.end());
    std::set<std::string> test(split.test_ids.begin(), split.test_ids.end());
    CHECK(train.size() == split.train_ids.size());
    CHECK(test.size() == split.test_ids.size());
    CHECK(train.size() + test.size() == queries.size());
    for (const auto& id : test) CHECK(train.count(id) == 0);

    // per-stratum test count = floor(0.2 * n): 2 + 1 + 0
    CHECK(split.test_ids.size() == 3);
}

TEST_CASE("balanced split is deterministic in the seed") {
    auto queries = typed_queries({{"factoid", 12}, {"open-ended", 8}});
    auto a = make_splits(queries, parse_split_scheme("balanced"), 0.75, 7);
    auto b = make_splits(queries, parse_split_scheme("balanced"), 0.75, 7);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);

    auto c = make_splits(queries, parse_split_scheme("balanced"), 0.75, 8);
    CHECK((a.train_ids != c.train_ids || a.test_ids != c.test_ids));
}

TEST_CASE("unseen split holds out exactly the named type") {
    auto queries = typed_queries({{"factoid", 6}, {"comparison", 5}, {"complex", 4}});
    auto split = make_splits(queries, parse_split_scheme("unseen:comparison"), 0.8, 3);

    CHECK(split.test_ids.size() == 5);
    std::set<std::string> test(split.test_ids.begin(), split.test_ids.end());
    for (const auto& q : queries) {
        bool held = q.query_type == QueryType::comparison;
        CHECK(test.count(q.id) == (held ? 1u : 0u));
    }
    CHECK(split.train_ids.size() == 10);
}

TEST_CASE("splits round-trip through the jsonl writer") {
    DatasetSplit split;
    split.name = "balanced";
    split.train_ids = {"q1", "q3"};
    split.test_ids = {"q2"};
    auto path = std::filesystem::temp_directory_path() / "ltrr_splits.jsonl";
    write_splits({split}, path.string());
    auto back = read_splits(path.string());
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == "balanced");
    CHECK(back[0].train_ids == split.train_ids);
    CHECK(back[0].test_ids == split.test_ids);
}
