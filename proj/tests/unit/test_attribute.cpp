#include <sstream>

#include "doctest.h"

#include "atelier/attribute.hpp"
#include "atelier/error.hpp"

using namespace atelier;

namespace {

Corpus small_corpus() {
    return Corpus({{"p1", "r", "", "baroque", 1642, ""},
                   {"p2", "r", "", "baroque", 1648, ""},
                   {"p3", "r", "", "baroque", std::nullopt, ""},
                   {"p4", "v", "", "rococo", 1760, ""}});
}

std::vector<std::string> faces_with_artists(Corpus& corpus, const std::vector<std::string>& artists) {
    std::vector<PaintingRecord> records;
    std::vector<std::string> faces;
    for (std::size_t i = 0; i < artists.size(); ++i) {
        records.push_back({"q" + std::to_string(i), artists[i], "", "s", std::nullopt, ""});
        faces.push_back("q" + std::to_string(i) + "__0");
    }
    corpus = Corpus(records);
    return faces;
}

}  // namespace

TEST_CASE("label_distribution") {
    const auto corpus = small_corpus();
    CHECK(label_distribution({"p1__0", "p2__0", "p3__0", "p4__0"}, Task::Artist, corpus) ==
          std::map<std::string, std::size_t>{{"r", 3}, {"v", 1}});
    CHECK(label_distribution({"p1__0", "p2__0", "p3__0"}, Task::Year, corpus) ==
          std::map<std::string, std::size_t>{{"1600-1650", 2}});
    CHECK(label_distribution({}, Task::Style, corpus).empty());
    CHECK_THROWS_AS(label_distribution({"nope__0"}, Task::Artist, corpus), IntegrityError);
}

TEST_CASE("label_distribution counts faces unless deduplicating paintings") {
    const auto corpus = small_corpus();
    const std::vector<std::string> cluster = {"p1__0", "p1__1", "p1__2", "p4__0"};
    CHECK(label_distribution(cluster, Task::Artist, corpus).at("r") == 3);
    CHECK(label_distribution(cluster, Task::Artist, corpus, true).at("r") == 1);
}

TEST_CASE("attribute_cluster strict majority") {
    Corpus corpus;
    auto faces = faces_with_artists(corpus, {"rembrandt", "rembrandt", "rembrandt", "rembrandt", "rembrandt",
                                             "rembrandt", "a", "b", "c", "d"});
    const auto a = attribute_cluster(faces, 4, Task::Artist, corpus);
    REQUIRE(a.has_value());
    CHECK(a->label == "rembrandt");
    CHECK(a->majority_fraction == doctest::Approx(0.6));
    CHECK(a->labeled_count == 10);
    CHECK(a->size == 10);
    CHECK(a->cluster_id == 4);

    faces = faces_with_artists(corpus, {"x", "x", "x", "x", "x", "y", "y", "y", "y", "y"});
    CHECK_FALSE(attribute_cluster(faces, 0, Task::Artist, corpus).has_value());

    // Ties never win, even under a permissive threshold.
    faces = faces_with_artists(corpus, {"x", "x", "y", "y", "z"});
    CHECK_FALSE(attribute_cluster(faces, 0, Task::Artist, corpus, {0.3, false}).has_value());
    faces = faces_with_artists(corpus, {"x", "x", "x", "y", "y", "z"});
    CHECK(attribute_cluster(faces, 0, Task::Artist, corpus, {0.3, false})->label == "x");

    CHECK_THROWS_AS(attribute_cluster(faces, 0, Task::Artist, corpus, {1.0, false}), DomainError);
    CHECK_THROWS_AS(attribute_cluster(faces, 0, Task::Artist, corpus, {0.0, false}), DomainError);
}

TEST_CASE("year attribution uses labeled members only") {
    const Corpus corpus({{"a", "x", "", "s", std::nullopt, ""}, {"b", "x", "", "s", std::nullopt, ""}});
    CHECK_FALSE(attribute_cluster({"a__0", "b__0"}, 0, Task::Year, corpus).has_value());

    const Corpus mixed({{"a", "x", "", "s", 1642, ""},
                        {"b", "x", "", "s", 1610, ""},
                        {"c", "x", "", "s", std::nullopt, ""},
                        {"d", "x", "", "s", std::nullopt, ""},
                        {"e", "x", "", "s", std::nullopt, ""}});
    const auto a = attribute_cluster({"a__0", "b__0", "c__0", "d__0", "e__0"}, 0, Task::Year, mixed);
    REQUIRE(a.has_value());
    CHECK(a->label == "1600-1650");
    CHECK(a->majority_fraction == 1.0);
    CHECK(a->labeled_count == 2);
    CHECK(a->size == 5);
}

TEST_CASE("merge_by_label") {
    ClusterAttribution a{0, Task::Style, "baroque", 0.9, 30, 30, {}};
    ClusterAttribution b{1, Task::Style, "baroque", 0.8, 20, 20, {}};
    ClusterAttribution c{2, Task::Style, "rococo", 0.7, 5, 5, {}};
    for (int i = 0; i < 30; ++i) a.members.push_back("a" + std::to_string(i));
    for (int i = 0; i < 20; ++i) b.members.push_back("b" + std::to_string(i));
    for (int i = 0; i < 5; ++i) c.members.push_back("c" + std::to_string(i));

    const auto merged = merge_by_label({a, b, c});
    CHECK(merged.size() == 2);
    CHECK(merged.at("baroque").size() == 50);
    CHECK(merged.at("rococo") == c.members);

    const auto distinct = merge_by_label({a, c});
    CHECK(distinct.at("baroque") == a.members);
    CHECK(merge_by_label({}).empty());

    auto other_task = c;
    other_task.task = Task::Year;
    CHECK_THROWS_AS(merge_by_label({a, other_task}), DomainError);
}

TEST_CASE("attribution file round trip") {
    std::vector<ClusterAttribution> rows = {{3, Task::Year, "1600-1650", 0.75, 8, 12, {}}};
    std::ostringstream out;
    write_attributions(out, rows);
    CHECK(out.str().find(R"("cluster_id":3,"task":"year","label":"1600-1650","fraction":0.75,"size":12)") !=
          std::string::npos);
    std::istringstream in(out.str());
    const auto back = read_attributions(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].label == "1600-1650");
    CHECK(back[0].labeled_count == 8);
    std::istringstream bad(R"({"cluster_id":3,"task":"decade","label":"x","fraction":1,"size":1})");
    CHECK_THROWS_AS(read_attributions(bad), ParseError);
}
