#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "pbct/corpus_io.hpp"
#include "pbct/errors.hpp"
#include "pbct/inference.hpp"
#include "pbct/likelihood.hpp"
#include "pbct/model_io.hpp"

using namespace pbct;

TEST_CASE("read_corpus tokens") {
  std::istringstream in("a b a\n\nc a\n");
  const auto c = read_corpus(in, CorpusFormat::kTokens);
  CHECK(c.vocab.size() == 3);
  CHECK(c.vocab.label(1) == "a");
  CHECK(c.vocab.label(3) == "c");
  REQUIRE(c.sequences.size() == 2);
  CHECK(c.sequences[0] == Sequence{1, 2, 1});
  CHECK(c.sequences[1] == Sequence{3, 1});

  std::istringstream crlf("a b\r\nb a\r\n");
  const auto w = read_corpus(crlf, CorpusFormat::kTokens);
  CHECK(w.vocab.size() == 2);
  CHECK(w.sequences[1] == Sequence{2, 1});

  std::istringstream unknown("a z\n");
  CHECK_THROWS_AS(read_corpus(unknown, CorpusFormat::kTokens, Vocabulary(std::vector<std::string>{"a", "b"})),
                  SymbolOutOfRange);
}

TEST_CASE("read_corpus integers") {
  std::istringstream in("1 2 2\n2 1\n");
  const auto c = read_corpus(in, CorpusFormat::kIntegers, Vocabulary(2));
  CHECK(c.sequences[0] == Sequence{1, 2, 2});
  std::istringstream bad("1 3 1\n");
  CHECK_THROWS_AS(read_corpus(bad, CorpusFormat::kIntegers, Vocabulary(2)), SymbolOutOfRange);
  std::istringstream junk("1 x\n");
  CHECK_THROWS_AS(read_corpus(junk, CorpusFormat::kIntegers, Vocabulary(2)), Error);
  std::istringstream novocab("1 2\n");
  CHECK_THROWS_AS(read_corpus(novocab, CorpusFormat::kIntegers), InvalidParameter);
  CHECK_THROWS_AS(read_corpus(std::filesystem::path("/nonexistent/corpus.txt"), CorpusFormat::kTokens), IoError);
}

TEST_CASE("write_corpus round trip and digest") {
  const SequenceCorpus c{Vocabulary(std::vector<std::string>{"x", "y"}), {{1, 2, 2}, {2}}};
  std::ostringstream out;
  write_corpus(out, c);
  std::istringstream in(out.str());
  const auto back = read_corpus(in, CorpusFormat::kTokens, c.vocab);
  CHECK(back.sequences == c.sequences);
  CHECK(corpus_digest(back) == corpus_digest(c));
  CHECK(corpus_digest(c).size() == 16);
  const SequenceCorpus d{c.vocab, {{1, 2}, {2, 2}}};
  CHECK(corpus_digest(c) != corpus_digest(d));
}

namespace {

ModelFile fitted_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int V = 4;
  Sequence x;
  for (int i = 0; i < 3000; ++i) x.push_back(i > 1 && x[static_cast<std::size_t>(i - 1)] == 1 ? 2 : 1 + static_cast<int>(rng() % V));
  const SequenceCorpus train{Vocabulary(V), {x}};
  ModelFile m;
  m.hyper = Hyperparams::symmetric(V, 0.5, 1.5, 2, 0.8);
  m.tree = fit_pbct(train, FitConfig{m.hyper});
  m.train_counts = compute_counts(m.tree, train);
  m.provenance = {"pbct", seed, "2026-01-01T00:00:00Z", corpus_digest(train)};
  return m;
}

}  // namespace

TEST_CASE("model file round trip preserves held-out likelihood") {
  const ModelFile m = fitted_model(7);
  REQUIRE(leaf_count(m.tree) > 1);
  const std::string text = serialize_model(m);
  const ModelFile back = parse_model(text);
  CHECK(back == m);
  CHECK(serialize_model(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "pbct_test_model.json";
  write_model(path, m);
  const ModelFile from_disk = read_model(path);
  std::filesystem::remove(path);

  std::mt19937_64 rng(8);
  const SequenceCorpus test{Vocabulary(4), {pbct::testing::random_sequence(4, 500, rng)}};
  const double a = log_predictive_likelihood(m.train_counts, compute_counts(m.tree, test), m.hyper.eta).total_log_ml;
  const double b =
      log_predictive_likelihood(from_disk.train_counts, compute_counts(from_disk.tree, test), from_disk.hyper.eta)
          .total_log_ml;
  CHECK(std::abs(a - b) <= 1e-12);
}

TEST_CASE("labels survive the round trip") {
  ModelFile m;
  m.hyper = Hyperparams::symmetric(3, 1.0, 1.0, 3);
  m.tree = pbct::testing::figure_one_tree();
  m.train_counts = CountTable::zeros(m.tree);
  m.provenance.model = "simulated";
  const ModelFile back = parse_model(serialize_model(m));
  CHECK(back.tree.vocab().label(2) == "B");
  CHECK(back == m);
}

TEST_CASE("model file errors") {
  ModelFile m;
  m.hyper = Hyperparams::symmetric(3, 1.0, 1.0, 3);
  m.tree = pbct::testing::figure_one_tree();
  m.train_counts = CountTable::zeros(m.tree);
  std::string text = serialize_model(m);

  std::string v2 = text;
  v2.replace(v2.find("\"format_version\": 1"), 19, "\"format_version\": 2");
  CHECK_THROWS_AS(parse_model(v2), FormatVersionMismatch);

  // Node (1) repeats symbol 1 and never covers 2.
  const std::string bad_node = R"({"format_version":1,"vocab":{"size":2},"hyper":{"eta":[1,1],"alpha":{"base":1,"decay":1},"max_depth":2},
    "tree":{"nodes":[{"path":[],"blocks":[[1],[2]]},{"path":[1],"blocks":[[1],[1,2]]}],"leaves":[[1,1],[1,2],[2]]},
    "train_counts":[],"provenance":{"model":"x","seed":0,"fit_timestamp":"","corpus_digest":""}})";
  try {
    parse_model(bad_node);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("$.tree") != std::string::npos);
    CHECK(msg.find("(1)") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model("{not json"), SchemaError);
  CHECK_THROWS_AS(parse_model(R"({"format_version":1})"), SchemaError);
  CHECK_THROWS_AS(read_model("/nonexistent/model.json"), IoError);
}
