#include "pbct/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pbct/errors.hpp"

namespace pbct {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(path + "." + key, "missing");
  return *it;
}

template <typename T>
T as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    schema_fail(path, e.what());
  }
}

json node_path(const NodeIndex& e) { return json(e.path); }

NodeIndex parse_path(const json& j, const std::string& path) {
  auto p = as<std::vector<int>>(j, path);
  for (int k : p) {
    if (k < 1) schema_fail(path, "child numbers are 1-based");
  }
  return NodeIndex(std::move(p));
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  json j;
  j["format_version"] = model.format_version;

  const Vocabulary& vocab = model.tree.vocab();
  json jv;
  jv["size"] = vocab.size();
  if (vocab.has_labels()) jv["labels"] = vocab.labels();
  j["vocab"] = jv;

  j["hyper"] = {{"eta", model.hyper.eta},
                {"alpha", {{"base", model.hyper.alpha.base}, {"decay", model.hyper.alpha.decay}}},
                {"max_depth", model.hyper.max_depth}};

  json nodes = json::array();
  for (const auto& [e, part] : model.tree.children()) {
    nodes.push_back({{"path", node_path(e)}, {"blocks", part.blocks()}});
  }
  json leaves = json::array();
  for (const auto& e : model.tree.leaves()) leaves.push_back(node_path(e));
  j["tree"] = {{"nodes", nodes}, {"leaves", leaves}};

  json counts = json::array();
  for (const auto& [e, c] : model.train_counts.counts) counts.push_back({{"leaf", node_path(e)}, {"counts", c}});
  j["train_counts"] = counts;

  j["provenance"] = {{"model", model.provenance.model},
                     {"seed", model.provenance.seed},
                     {"fit_timestamp", model.provenance.fit_timestamp},
                     {"corpus_digest", model.provenance.corpus_digest}};
  return j.dump(2) + "\n";
}

ModelFile parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_fail("$", e.what());
  }
  ModelFile m;
  m.format_version = as<int>(field(j, "format_version", "$"), "$.format_version");
  if (m.format_version != ModelFile::kFormatVersion) {
    throw FormatVersionMismatch("model format_version " + std::to_string(m.format_version) + " is not supported (expected " +
                                std::to_string(ModelFile::kFormatVersion) + ")");
  }

  const json& jv = field(j, "vocab", "$");
  const int size = as<int>(field(jv, "size", "$.vocab"), "$.vocab.size");
  Vocabulary vocab;
  try {
    if (jv.contains("labels")) {
      auto labels = as<std::vector<std::string>>(jv["labels"], "$.vocab.labels");
      if (static_cast<int>(labels.size()) != size) schema_fail("$.vocab.labels", "length differs from size");
      vocab = Vocabulary(std::move(labels));
    } else {
      vocab = Vocabulary(size);
    }
  } catch (const InvalidParameter& e) {
    schema_fail("$.vocab", e.what());
  }

  const json& jh = field(j, "hyper", "$");
  m.hyper.eta = as<std::vector<double>>(field(jh, "eta", "$.hyper"), "$.hyper.eta");
  const json& ja = field(jh, "alpha", "$.hyper");
  m.hyper.alpha.base = as<double>(field(ja, "base", "$.hyper.alpha"), "$.hyper.alpha.base");
  m.hyper.alpha.decay = as<double>(field(ja, "decay", "$.hyper.alpha"), "$.hyper.alpha.decay");
  m.hyper.max_depth = as<int>(field(jh, "max_depth", "$.hyper"), "$.hyper.max_depth");
  try {
    m.hyper.validate(size);
  } catch (const InvalidParameter& e) {
    schema_fail("$.hyper", e.what());
  }

  const json& jt = field(j, "tree", "$");
  std::map<NodeIndex, Partition> children;
  const json& jn = field(jt, "nodes", "$.tree");
  if (!jn.is_array()) schema_fail("$.tree.nodes", "expected an array");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string p = "$.tree.nodes[" + std::to_string(i) + "]";
    NodeIndex e = parse_path(field(jn[i], "path", p), p + ".path");
    auto blocks = as<std::vector<Partition::Block>>(field(jn[i], "blocks", p), p + ".blocks");
    if (!children.emplace(std::move(e), Partition(std::move(blocks))).second) schema_fail(p, "duplicate node");
  }
  std::set<NodeIndex> leaves;
  const json& jl = field(jt, "leaves", "$.tree");
  if (!jl.is_array()) schema_fail("$.tree.leaves", "expected an array");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string p = "$.tree.leaves[" + std::to_string(i) + "]";
    if (!leaves.insert(parse_path(jl[i], p)).second) schema_fail(p, "duplicate leaf");
  }
  m.tree = ContextTree(vocab, m.hyper.max_depth, std::move(children), std::move(leaves));
  if (auto v = validate_tree(m.tree); !v.ok()) {
    schema_fail("$.tree", "node " + v.violations.front().node.to_string() + ": " + v.violations.front().message);
  }

  const json& jc = field(j, "train_counts", "$");
  if (!jc.is_array()) schema_fail("$.train_counts", "expected an array");
  m.train_counts.vocab_size = size;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string p = "$.train_counts[" + std::to_string(i) + "]";
    NodeIndex e = parse_path(field(jc[i], "leaf", p), p + ".leaf");
    auto c = as<CountVector>(field(jc[i], "counts", p), p + ".counts");
    if (!m.tree.is_leaf(e)) schema_fail(p + ".leaf", e.to_string() + " is not a leaf of the tree");
    if (static_cast<int>(c.size()) != size) schema_fail(p + ".counts", "expected " + std::to_string(size) + " entries");
    for (auto x : c) {
      if (x < 0) schema_fail(p + ".counts", "negative count");
    }
    if (!m.train_counts.counts.emplace(std::move(e), std::move(c)).second) schema_fail(p, "duplicate leaf");
  }
  if (m.train_counts.counts.size() != m.tree.leaves().size()) {
    schema_fail("$.train_counts", "must list every leaf exactly once");
  }

  const json& jp = field(j, "provenance", "$");
  m.provenance.model = as<std::string>(field(jp, "model", "$.provenance"), "$.provenance.model");
  m.provenance.seed = as<std::uint64_t>(field(jp, "seed", "$.provenance"), "$.provenance.seed");
  m.provenance.fit_timestamp = as<std::string>(field(jp, "fit_timestamp", "$.provenance"), "$.provenance.fit_timestamp");
  m.provenance.corpus_digest = as<std::string>(field(jp, "corpus_digest", "$.provenance"), "$.provenance.corpus_digest");
  return m;
}

void write_model(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  out << serialize_model(model);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace pbct
