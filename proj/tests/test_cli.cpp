#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "gwla/config.hpp"
#include "gwla/csv.hpp"
#include "gwla/svg.hpp"

using namespace gwla;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config ships complete defaults") {
  Config c;
  CHECK(c.get_int("workers") == 16);
  CHECK(c.get_int("unroll") == 50);
  CHECK(c.get_double("gamma") == doctest::Approx(0.99));
  CHECK(c.get_double("rmsprop_eps") == doctest::Approx(0.1));
  CHECK(c.get_double("entropy_cost") == doctest::Approx(0.003));
  CHECK(c.get("variant") == "layerwise_attention");
  CHECK(c.get_bool("aux_enabled"));
  CHECK_FALSE(c.get_bool("exclusive_updates"));
  CHECK(c.get_int("max_decisions") == 100);
  CHECK(c.has("curriculum_sizes"));
  CHECK_FALSE(c.has("no_such_key"));
}

TEST_CASE("setting an unregistered key is an error") {
  Config c;
  CHECK_THROWS_WITH_AS(c.set("wrokers", "4"), "unknown config key: wrokers",
                       std::invalid_argument);
  CHECK_THROWS_AS(c.get("wrokers"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(c.set_pair("workers4"), "--set expects key=value, got: workers4",
                       std::invalid_argument);
  c.set_pair(" workers = 4 ");
  CHECK(c.get_int("workers") == 4);
}

TEST_CASE("config files layer over defaults and report bad lines") {
  TempFile f("gwla_cfg_ok.txt",
             "# comment\n"
             "\n"
             "workers = 3   \n"
             "run_name = exp1  # trailing comment\n");
  Config c;
  c.load_file(f.path);
  CHECK(c.get_int("workers") == 3);
  CHECK(c.get("run_name") == "exp1");
  CHECK(c.get_int("unroll") == 50);  // untouched default

  TempFile bad("gwla_cfg_bad.txt", "workers = 2\njust_a_token\n");
  Config c2;
  CHECK_THROWS_WITH_AS(c2.load_file(bad.path),
                       (bad.path + ":2: expected key = value").c_str(), std::invalid_argument);

  TempFile unknown("gwla_cfg_unknown.txt", "wrokers = 2\n");
  Config c3;
  CHECK_THROWS_WITH_AS(c3.load_file(unknown.path),
                       (unknown.path + ":1: unknown config key: wrokers").c_str(),
                       std::invalid_argument);

  Config c4;
  CHECK_THROWS_AS(c4.load_file("/no/such/dir/missing.cfg"), std::runtime_error);
}

TEST_CASE("environment variables override files, explicit pairs override both") {
  TempFile f("gwla_cfg_prec.txt", "workers = 10\nseed = 5\n");
  setenv("GWL_WORKERS", "7", 1);
  Config c;
  c.load_file(f.path);
  c.load_env();
  CHECK(c.get_int("workers") == 7);  // env beats file
  CHECK(c.get_int("seed") == 5);     // file survives when no env var exists
  c.set_pair("workers=2");
  CHECK(c.get_int("workers") == 2);  // --set beats env
  unsetenv("GWL_WORKERS");
}

TEST_CASE("typed getters name the key and offending value") {
  Config c;
  c.set("workers", "abc");
  CHECK_THROWS_WITH_AS(c.get_int("workers"), "config key workers: not an integer: 'abc'",
                       std::invalid_argument);
  c.set("gamma", "1.5x");
  CHECK_THROWS_WITH_AS(c.get_double("gamma"), "config key gamma: not a number: '1.5x'",
                       std::invalid_argument);
  c.set("aux_enabled", "maybe");
  CHECK_THROWS_WITH_AS(c.get_bool("aux_enabled"), "config key aux_enabled: not a boolean: 'maybe'",
                       std::invalid_argument);
  for (const char* t : {"true", "1", "yes", "on"}) {
    c.set("aux_enabled", t);
    CHECK(c.get_bool("aux_enabled"));
  }
  for (const char* t : {"false", "0", "no", "off"}) {
    c.set("aux_enabled", t);
    CHECK_FALSE(c.get_bool("aux_enabled"));
  }
}

TEST_CASE("integer lists parse with spacing and reject junk") {
  Config c;
  CHECK(c.get_int_list("curriculum_sizes") == std::vector<int>{2, 5, 10, 40});
  c.set("curriculum_sizes", " 1 , 2 ,3 ");
  CHECK(c.get_int_list("curriculum_sizes") == std::vector<int>{1, 2, 3});
  c.set("curriculum_sizes", "1,two");
  CHECK_THROWS_WITH_AS(c.get_int_list("curriculum_sizes"),
                       "config key curriculum_sizes: not an integer list entry: 'two'",
                       std::invalid_argument);
}

TEST_CASE("the manifest lists every key sorted") {
  Config c;
  std::string m = c.manifest();
  CHECK(m.find("workers = 16\n") != std::string::npos);
  CHECK(m.find("variant = layerwise_attention\n") != std::string::npos);
  // map iteration order: aux_batch precedes workers
  CHECK(m.find("aux_batch") < m.find("workers"));
  CHECK(count_occurrences(m, " = ") >= 30);
}

TEST_CASE("variant names resolve or fail loudly") {
  CHECK(variant_from("baseline") == Variant::Baseline);
  CHECK(variant_from("layerwise_attention") == Variant::LayerwiseAttention);
  CHECK(variant_from("attention") == Variant::LayerwiseAttention);
  CHECK_THROWS_AS(variant_from("bogus"), std::invalid_argument);
}

TEST_CASE("training configs map keys and validate ranges") {
  Config c;
  c.set("workers", "4");
  c.set("unroll", "20");
  c.set("frame_side", "44");
  c.set("max_decisions", "60");
  c.set("start_lr", "0.0007");
  c.set("exclusive_updates", "true");
  c.set("aux_enabled", "false");
  TrainConfig t = train_config_from(c);
  CHECK(t.workers == 4);
  CHECK(t.unroll == 20);
  CHECK(t.render.side == 44);
  CHECK(t.world.max_decisions == 60);
  CHECK(t.start_lr == doctest::Approx(0.0007));
  CHECK(t.exclusive_updates);
  CHECK_FALSE(t.aux_enabled);
  CHECK(t.gamma == doctest::Approx(0.99));

  Config bad;
  bad.set("unroll", "0");
  CHECK_THROWS_AS(train_config_from(bad), std::invalid_argument);
  Config bad2;
  bad2.set("gamma", "0");
  CHECK_THROWS_AS(train_config_from(bad2), std::invalid_argument);
  Config bad3;
  bad3.set("gamma", "1.2");
  CHECK_THROWS_AS(train_config_from(bad3), std::invalid_argument);
  Config bad4;
  bad4.set("start_lr", "0");
  CHECK_THROWS_AS(train_config_from(bad4), std::invalid_argument);
  Config bad5;
  bad5.set("entropy_cost", "-0.1");
  CHECK_THROWS_AS(train_config_from(bad5), std::invalid_argument);
}

TEST_CASE("word lists resolve names, ids, and the empty default") {
  Vocabulary vocab;
  Config c;
  std::vector<int> all = words_from(c, vocab);
  CHECK(all.size() == 56);
  CHECK(all.front() == 0);
  CHECK(all.back() == 55);

  c.set("words", "chair,blue");
  CHECK(words_from(c, vocab) == std::vector<int>{0, 40});
  c.set("words", "3, 7");
  CHECK(words_from(c, vocab) == std::vector<int>{3, 7});
  c.set("words", "999");
  CHECK_THROWS_AS(words_from(c, vocab), std::invalid_argument);
  c.set("words", "zzz");
  CHECK_THROWS_AS(words_from(c, vocab), std::invalid_argument);
  c.set("words", ",");
  CHECK_THROWS_AS(words_from(c, vocab), std::invalid_argument);
}

TEST_CASE("csv parsing reports width mismatches by line") {
  CsvTable t = parse_csv("a,b,c\n1,2,3\n4,5,6\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("zzz") == -1);
  CHECK(t.number(1, 2) == doctest::Approx(6.0));

  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2,3\n", "probe.csv"),
                       "probe.csv:2: expected 2 columns, got 3", std::invalid_argument);
  CHECK_THROWS_AS(parse_csv(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("\n\n"), std::invalid_argument);

  // Carriage returns and leading blank lines are tolerated.
  CsvTable crlf = parse_csv("\r\n\na,b\r\n1,2\r\n");
  CHECK(crlf.header == std::vector<std::string>{"a", "b"});
  CHECK(crlf.rows[0][1] == "2");

  CHECK_THROWS_AS(t.number(0, -1), std::out_of_range);
  CHECK_THROWS_AS(t.number(9, 0), std::out_of_range);
  CsvTable text = parse_csv("x\nhello\n");
  CHECK_THROWS_AS(text.number(0, 0), std::invalid_argument);
}

TEST_CASE("csv files round-trip exactly") {
  CsvTable t;
  t.header = {"step", "reward"};
  t.rows = {{"0", "-10"}, {"100", "9.5"}};
  std::string path = (std::filesystem::temp_directory_path() / "gwla_roundtrip.csv").string();
  write_csv(path, t);
  CsvTable back = read_csv(path);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  std::remove(path.c_str());

  CsvTable bad = t;
  bad.rows.push_back({"only-one"});
  CHECK_THROWS_AS(write_csv(path, bad), std::invalid_argument);
  CsvTable comma = t;
  comma.rows[0][0] = "1,5";
  CHECK_THROWS_AS(write_csv(path, comma), std::invalid_argument);
  CHECK_THROWS_AS(read_csv("/no/such/file.csv"), std::runtime_error);
}

TEST_CASE("line charts are deterministic and structurally sound") {
  CsvTable t;
  t.header = {"step", "known", "reward"};
  t.rows = {{"0", "0", "-10"}, {"1000", "2", "-3"}, {"2000", "5", "8.5"}};
  std::string a = svg_line_chart(t, "learning");
  std::string b = svg_line_chart(t, "learning");
  CHECK(a == b);
  CHECK(a.substr(0, 4) == "<svg");
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(count_occurrences(a, "<polyline") == 2);  // one per y column
  CHECK(a.find("learning") != std::string::npos);
  CHECK(a.find("known") != std::string::npos);  // legend entries
  CHECK(a.find("reward") != std::string::npos);

  CsvTable one_col;
  one_col.header = {"x"};
  one_col.rows = {{"1"}};
  CHECK_THROWS_AS(svg_line_chart(one_col, "t"), std::invalid_argument);
  CsvTable no_rows;
  no_rows.header = {"x", "y"};
  CHECK_THROWS_AS(svg_line_chart(no_rows, "t"), std::invalid_argument);
}

TEST_CASE("bar charts draw one rect per value plus chrome") {
  CsvTable t;
  t.header = {"condition", "steps"};
  t.rows = {{"pretrained", "120000"}, {"fresh", "310000"}};
  std::string a = svg_bar_chart(t, "comparison");
  CHECK(a == svg_bar_chart(t, "comparison"));
  CHECK(count_occurrences(a, "<rect") >= 2);
  CHECK(a.find("pretrained") != std::string::npos);
  CHECK(a.find("fresh") != std::string::npos);
  CHECK_THROWS_AS(svg_bar_chart(CsvTable{{"x"}, {{"1"}}}, "t"), std::invalid_argument);
}

TEST_CASE("text files write atomically enough to read back") {
  std::string path = (std::filesystem::temp_directory_path() / "gwla_text.txt").string();
  write_text_file(path, "hello\nworld\n");
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "hello\nworld\n");
  std::remove(path.c_str());
}
