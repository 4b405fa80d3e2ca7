#include <doctest.h>

#include <set>
#include <thread>

#include "fixtures.hpp"
#include "rtlmut/cache.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

using namespace rtlmut;

namespace {

MutationEntry entry(const std::string& module_id, int region, const std::string& class_id,
                    const std::string& target, const std::string& mutated) {
  MutationEntry e;
  e.design_id = "d";
  e.module_id = module_id;
  e.file = module_id + ".v";
  e.region_index = region;
  e.region_start_line = 1;
  e.region_end_line = 50;
  e.class_id = class_id;
  e.target_block = {10, 10, target};
  e.mutated_text = mutated;
  e.summary = "test mutation";
  e.scenario_id = "d/" + module_id + "#001";
  return e;
}

}  // namespace

TEST_CASE("record_attempt assigns ids and timestamps") {
  MutationCache cache;
  auto id1 = cache.record_attempt(entry("m", 0, "logic_bug", "a && b", "a || b"));
  auto id2 = cache.record_attempt(entry("m", 0, "logic_bug", "c && d", "c || d"));
  CHECK(id1 == 1);
  CHECK(id2 == 2);
  CHECK(cache.size() == 2);
  auto found = cache.find(id1);
  REQUIRE(found.has_value());
  CHECK(found->outcome == Outcome::Pending);
  CHECK(found->timestamp > 0.0);
}

TEST_CASE("outcomes transition exactly once") {
  MutationCache cache;
  auto id = cache.record_attempt(entry("m", 0, "logic_bug", "a && b", "a || b"));
  cache.update_outcome(id, Outcome::Success);
  CHECK(cache.find(id)->outcome == Outcome::Success);
  CHECK_THROWS_AS(cache.update_outcome(id, Outcome::Undetected), AlreadyFinalized);
  CHECK_THROWS_AS(cache.update_outcome(999, Outcome::Success), UnknownEntry);
}

TEST_CASE("rejects targets outside the region and non-pending entries") {
  MutationCache cache;
  auto bad = entry("m", 0, "logic_bug", "a && b", "a || b");
  bad.target_block.start_line = 80;
  bad.target_block.end_line = 80;
  CHECK_THROWS_AS(cache.record_attempt(bad), StorageError);

  auto finalized = entry("m", 0, "logic_bug", "a && b", "a || b");
  finalized.outcome = Outcome::Success;
  CHECK_THROWS_AS(cache.record_attempt(finalized), StorageError);
}

TEST_CASE("structural uniqueness ignores whitespace and layout") {
  MutationCache cache;
  cache.record_attempt(entry("m", 0, "logic_bug", "  if (a && b)\n", "  if (a || b)\n"));

  CHECK(cache.is_duplicate(StructuralKey::make("m", "logic_bug", "if (a && b)", "if (a || b)")));
  CHECK(cache.is_duplicate(
      StructuralKey::make("m", "logic_bug", "if  (a  &&  b)", "if  (a  ||  b)")));
  CHECK_FALSE(cache.is_duplicate(StructuralKey::make("m", "logic_bug", "if (a&&b)", "if (a||b)")));
  CHECK_FALSE(
      cache.is_duplicate(StructuralKey::make("m2", "logic_bug", "if (a && b)", "if (a || b)")));
  CHECK_FALSE(
      cache.is_duplicate(StructuralKey::make("m", "wrong_assignment", "if (a && b)", "if (a || b)")));
}

TEST_CASE("fingerprints are stable hex digests") {
  auto key = StructuralKey::make("m", "logic_bug", "x", "y");
  CHECK(key.fingerprint().size() == 64);
  CHECK(key.fingerprint() == key.fingerprint());
  CHECK(key.fingerprint() != StructuralKey::make("m", "logic_bug", "x", "z").fingerprint());
}

TEST_CASE("persistent log replays entries and outcomes") {
  fixtures::TempDir dir("cache");
  std::string path = dir.file("cache.jsonl");
  std::int64_t id1 = 0, id2 = 0;
  {
    MutationCache cache(path);
    id1 = cache.record_attempt(entry("m", 0, "logic_bug", "a && b", "a || b"));
    id2 = cache.record_attempt(entry("m", 1, "missing_assignment", "x = y;", "// x = y;"));
    cache.update_outcome(id1, Outcome::SyntaxFailure);
  }
  MutationCache replayed(path);
  CHECK(replayed.size() == 2);
  CHECK(replayed.find(id1)->outcome == Outcome::SyntaxFailure);
  CHECK(replayed.find(id2)->outcome == Outcome::Pending);
  CHECK(replayed.is_duplicate(StructuralKey::make("m", "logic_bug", "a && b", "a || b")));

  auto next = replayed.record_attempt(entry("m", 2, "logic_bug", "p && q", "p || q"));
  CHECK(next == id2 + 1);

  auto entries = MutationCache::load_entries(path);
  CHECK(entries.size() == 3);
}

TEST_CASE("corrupted log lines name the file and line") {
  fixtures::TempDir dir("cache-bad");
  std::string path = dir.file("cache.jsonl");
  fixtures::write_text(path, "{\"event\":\"attempt\"\n");
  try {
    MutationCache cache(path);
    FAIL("expected StorageError");
  } catch (const StorageError& e) {
    std::string msg = e.what();
    CHECK(msg.find("cache.jsonl") != std::string::npos);
    CHECK(msg.find(":1") != std::string::npos);
  }
}

TEST_CASE("region history splits by outcome and filters in coverage mode") {
  MutationCache cache;
  auto ok = cache.record_attempt(entry("m", 3, "logic_bug", "a && b", "a || b"));
  auto syn = cache.record_attempt(entry("m", 3, "logic_bug", "c && d", "c || d"));
  auto und = cache.record_attempt(entry("m", 3, "missing_assignment", "x = y;", "// x = y;"));
  cache.record_attempt(entry("m", 4, "logic_bug", "e && f", "e || f"));
  cache.update_outcome(ok, Outcome::Success);
  cache.update_outcome(syn, Outcome::SyntaxFailure);
  cache.update_outcome(und, Outcome::Undetected);

  auto history = cache.region_history("m", 3);
  CHECK(history.succeeded.size() == 1);
  CHECK(history.failed.size() == 2);

  auto coverage = cache.region_history("m", 3, true);
  CHECK(coverage.succeeded.size() == 1);
  CHECK(coverage.failed.size() == 1);

  CHECK(cache.region_history("m", 9).succeeded.empty());
}

TEST_CASE("region stats aggregate counts and class histograms") {
  MutationCache cache;
  auto a = cache.record_attempt(entry("m", 0, "logic_bug", "a && b", "a || b"));
  auto b = cache.record_attempt(entry("m", 0, "logic_bug", "c && d", "c || d"));
  cache.record_attempt(entry("m", 0, "missing_assignment", "x = y;", "// x = y;"));
  cache.update_outcome(a, Outcome::Success);
  cache.update_outcome(b, Outcome::Undetected);

  auto stats = cache.region_stats("m");
  REQUIRE(stats.count(0) == 1);
  CHECK(stats[0].recorded == 3);
  CHECK(stats[0].finalized == 2);
  CHECK(stats[0].successes == 1);
  CHECK(stats[0].class_histogram["logic_bug"] == 2);
  CHECK(stats[0].success_rate().value() == doctest::Approx(0.5));

  RegionStats empty;
  CHECK_FALSE(empty.success_rate().has_value());
}

TEST_CASE("outcome_counts tallies the taxonomy") {
  MutationCache cache;
  auto a = cache.record_attempt(entry("m", 0, "logic_bug", "a && b", "a || b"));
  cache.record_attempt(entry("m", 0, "logic_bug", "c && d", "c || d"));
  cache.update_outcome(a, Outcome::Success);
  auto counts = cache.outcome_counts();
  CHECK(counts.detected == 1);
  CHECK(counts.pending == 1);
  CHECK(counts.total() == 2);
}

TEST_CASE("parallel recorders get unique ids and a consistent log") {
  fixtures::TempDir dir("cache-mt");
  MutationCache cache(dir.file("cache.jsonl"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&cache, t] {
      for (int i = 0; i < 25; ++i) {
        std::string tag = std::to_string(t) + "_" + std::to_string(i);
        cache.record_attempt(entry("m", 0, "logic_bug", "a" + tag + " && b", "a" + tag + " || b"));
      }
    });
  for (auto& th : threads) th.join();
  CHECK(cache.size() == 100);
  auto entries = cache.snapshot();
  std::set<std::int64_t> ids;
  for (const auto& e : entries) ids.insert(e.entry_id);
  CHECK(ids.size() == 100);
}

TEST_CASE("scenario log round-trips records") {
  fixtures::TempDir dir("scenlog");
  std::string path = dir.file("scenarios.jsonl");
  {
    ScenarioLog log(path);
    BugScenarioRecord rec;
    rec.scenario_id = "d/m#001";
    rec.design_id = "d";
    rec.module_id = "m";
    rec.mutation_entry_ids = {1, 2};
    rec.attempt_number = 2;
    rec.final_outcome = Outcome::Success;
    rec.generation_seconds = 1.5;
    rec.validation_seconds = 2.5;
    rec.duplicates_regenerated = 1;
    log.record(rec);
  }
  auto records = ScenarioLog::load(path);
  REQUIRE(records.size() == 1);
  CHECK(records[0].scenario_id == "d/m#001");
  CHECK(records[0].mutation_entry_ids == std::vector<std::int64_t>{1, 2});
  CHECK(records[0].attempt_number == 2);
  CHECK(records[0].final_outcome == Outcome::Success);
  CHECK_FALSE(records[0].abandoned);
  CHECK(records[0].generation_seconds == doctest::Approx(1.5));
  CHECK(records[0].duplicates_regenerated == 1);
}

TEST_CASE("outcome strings round-trip") {
  for (Outcome o :
       {Outcome::Pending, Outcome::Success, Outcome::SyntaxFailure, Outcome::Undetected})
    CHECK(outcome_from_string(outcome_to_string(o)) == o);
  CHECK_THROWS_AS(outcome_from_string("bogus"), StorageError);
}
