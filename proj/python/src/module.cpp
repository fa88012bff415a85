#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "pbct/errors.hpp"
#include "pbct/experiment.hpp"
#include "pbct/generator.hpp"
#include "pbct/inference.hpp"
#include "pbct/likelihood.hpp"
#include "pbct/metrics.hpp"
#include "pbct/model_io.hpp"

namespace py = pybind11;
using namespace pbct;

namespace {

using Eta = std::variant<double, std::vector<double>>;
using Blocks = std::vector<std::vector<int>>;
using Path = std::vector<int>;

std::vector<double> expand_eta(const Eta& eta, int vocab_size) {
  if (const double* e = std::get_if<double>(&eta)) return std::vector<double>(static_cast<std::size_t>(vocab_size), *e);
  return std::get<std::vector<double>>(eta);
}

SequenceCorpus make_corpus(int vocab_size, std::vector<Sequence> sequences) {
  SequenceCorpus c{Vocabulary(vocab_size), std::move(sequences)};
  c.validate();
  return c;
}

FitConfig make_config(int vocab_size, double alpha, int max_depth, const Eta& eta, double decay,
                      std::int64_t min_context_count) {
  FitConfig cfg;
  cfg.hyper.eta = expand_eta(eta, vocab_size);
  cfg.hyper.alpha = {alpha, decay};
  cfg.hyper.max_depth = max_depth;
  cfg.min_context_count = min_context_count;
  return cfg;
}

// Node paths cross into Python as tuples so they can key dicts.
py::tuple path_to_py(const NodeIndex& e) { return py::tuple(py::cast(e.path)); }

py::dict dists_to_py(const LeafDistributionTable& t) {
  py::dict out;
  for (const auto& [e, p] : t.dists) out[path_to_py(e)] = py::cast(p);
  return out;
}

LeafDistributionTable dists_from_py(const std::map<Path, std::vector<double>>& d) {
  LeafDistributionTable t;
  for (const auto& [p, v] : d) t.dists.emplace(NodeIndex(p), v);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parsimonious Bayesian context trees";

  py::register_exception<Error>(m, "PbctError");
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);

  py::class_<ContextTree>(m, "ContextTree")
      .def_static(
          "from_children",
          [](int vocab_size, int max_depth, const std::map<Path, Blocks>& children) {
            std::map<NodeIndex, Partition> c;
            for (const auto& [p, b] : children) c.emplace(NodeIndex(p), Partition(b));
            return ContextTree::from_children(Vocabulary(vocab_size), max_depth, std::move(c));
          },
          py::arg("vocab_size"), py::arg("max_depth"), py::arg("children"))
      .def_property_readonly("vocab_size", &ContextTree::vocab_size)
      .def_property_readonly("max_depth", &ContextTree::max_depth)
      .def_property_readonly("leaves",
                             [](const ContextTree& t) {
                               py::list out;
                               for (const auto& e : t.leaves()) out.append(path_to_py(e));
                               return out;
                             })
      .def_property_readonly("children",
                             [](const ContextTree& t) {
                               py::dict out;
                               for (const auto& [e, part] : t.children()) out[path_to_py(e)] = py::cast(part.blocks());
                               return out;
                             })
      .def("leaf_count", [](const ContextTree& t) { return leaf_count(t); })
      .def("realized_depth", &ContextTree::realized_depth)
      .def("validate",
           [](const ContextTree& t) {
             std::vector<std::string> out;
             for (const auto& v : validate_tree(t).violations) out.push_back(v.node.to_string() + ": " + v.message);
             return out;
           })
      .def("map_context_to_leaf",
           [](const ContextTree& t, const Sequence& history) { return path_to_py(map_context_to_leaf(t, history)); },
           py::arg("history"), "Leaf path for a history given most recent symbol first.")
      .def("__eq__", [](const ContextTree& a, const ContextTree& b) { return a == b; });

  m.def(
      "sample_crp_partition",
      [](int vocab_size, double alpha, std::uint64_t seed) {
        Rng rng(seed);
        return sample_crp_partition(vocab_size, alpha, rng).blocks();
      },
      py::arg("vocab_size"), py::arg("alpha"), py::arg("seed"));
  m.def(
      "crp_log_prior", [](const Blocks& blocks, double alpha) { return crp_log_prior(Partition(blocks), alpha); },
      py::arg("blocks"), py::arg("alpha"));
  m.def(
      "generate_tree",
      [](int vocab_size, double alpha, int max_depth, std::uint64_t seed, double decay) {
        Rng rng(seed);
        return generate_tree(Vocabulary(vocab_size), Hyperparams::symmetric(vocab_size, 1.0, alpha, max_depth, decay),
                             rng);
      },
      py::arg("vocab_size"), py::arg("alpha"), py::arg("max_depth"), py::arg("seed"), py::arg("decay") = 1.0);
  m.def(
      "sample_leaf_distributions",
      [](const ContextTree& tree, const Eta& eta, double lambda, std::uint64_t seed) {
        Rng rng(seed);
        Hyperparams h{expand_eta(eta, tree.vocab_size()), {}, tree.max_depth()};
        return dists_to_py(sample_leaf_distributions(tree, h, lambda, rng));
      },
      py::arg("tree"), py::arg("eta"), py::arg("lam"), py::arg("seed"));
  m.def(
      "simulate_sequence",
      [](const ContextTree& tree, const std::map<Path, std::vector<double>>& dists, std::size_t length,
         std::uint64_t seed) {
        Rng rng(seed);
        return simulate_sequence(tree, dists_from_py(dists), length, rng);
      },
      py::arg("tree"), py::arg("dists"), py::arg("length"), py::arg("seed"));

  m.def(
      "fit_pbct",
      [](std::vector<Sequence> sequences, int vocab_size, double alpha, int max_depth, const Eta& eta, double decay,
         std::int64_t min_context_count) {
        py::gil_scoped_release release;
        return fit_pbct(make_corpus(vocab_size, std::move(sequences)),
                        make_config(vocab_size, alpha, max_depth, eta, decay, min_context_count));
      },
      py::arg("sequences"), py::arg("vocab_size"), py::arg("alpha") = 1.0, py::arg("max_depth") = 3,
      py::arg("eta") = 1.0, py::arg("decay") = 1.0, py::arg("min_context_count") = 0);
  m.def(
      "fit_vbm",
      [](std::vector<Sequence> sequences, int vocab_size, double alpha, int max_depth, const Eta& eta, double decay) {
        py::gil_scoped_release release;
        return fit_vbm(make_corpus(vocab_size, std::move(sequences)),
                       make_config(vocab_size, alpha, max_depth, eta, decay, 0));
      },
      py::arg("sequences"), py::arg("vocab_size"), py::arg("alpha") = 1.0, py::arg("max_depth") = 3,
      py::arg("eta") = 1.0, py::arg("decay") = 1.0);
  m.def(
      "build_fbm", [](int vocab_size, int order) { return build_fbm(Vocabulary(vocab_size), order); },
      py::arg("vocab_size"), py::arg("order"));

  m.def("log_multivariate_beta", [](const std::vector<double>& v) { return log_multivariate_beta(v); });
  m.def(
      "log_marginal_likelihood",
      [](const ContextTree& tree, std::vector<Sequence> sequences, const Eta& eta) {
        const auto counts = compute_counts(tree, make_corpus(tree.vocab_size(), std::move(sequences)));
        return log_marginal_likelihood(counts, expand_eta(eta, tree.vocab_size())).total_log_ml;
      },
      py::arg("tree"), py::arg("sequences"), py::arg("eta") = 1.0);
  m.def(
      "chain_rule_log_prob",
      [](const ContextTree& tree, std::vector<Sequence> sequences, const Eta& eta) {
        return chain_rule_log_prob(tree, expand_eta(eta, tree.vocab_size()),
                                   make_corpus(tree.vocab_size(), std::move(sequences)));
      },
      py::arg("tree"), py::arg("sequences"), py::arg("eta") = 1.0);
  m.def(
      "marginal_log_loss",
      [](const ContextTree& tree, std::vector<Sequence> train, std::vector<Sequence> test, const Eta& eta) {
        const int V = tree.vocab_size();
        return marginal_log_loss(tree, make_corpus(V, std::move(train)), make_corpus(V, std::move(test)),
                                 expand_eta(eta, V));
      },
      py::arg("tree"), py::arg("train"), py::arg("test"), py::arg("eta") = 1.0);
  m.def(
      "predict_next",
      [](const ContextTree& tree, std::vector<Sequence> train, const Sequence& history, const Eta& eta) {
        const auto counts = compute_counts(tree, make_corpus(tree.vocab_size(), std::move(train)));
        return predict_next(tree, counts, expand_eta(eta, tree.vocab_size()), history);
      },
      py::arg("tree"), py::arg("train"), py::arg("history"), py::arg("eta") = 1.0,
      "Posterior-mean next-symbol distribution; history is most recent symbol first.");
  m.def(
      "adjusted_rand_index", [](const Blocks& a, const Blocks& b) { return adjusted_rand_index(Partition(a), Partition(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "tree_similarity",
      [](const ContextTree& t1, const ContextTree& t2, std::vector<Sequence> sequences, int depth) {
        return tree_similarity(t1, t2, make_corpus(t1.vocab_size(), std::move(sequences)), depth);
      },
      py::arg("t1"), py::arg("t2"), py::arg("sequences"), py::arg("depth"));

  m.def(
      "run_experiment",
      [](int vocab_size, double alpha, double decay, int max_depth, double eta, double lambda, std::size_t train_length,
         std::size_t test_length, int replicates, std::uint64_t seed, const std::vector<std::string>& models,
         std::uint64_t max_leaves) {
        ExperimentConfig cfg;
        cfg.vocab_size = vocab_size;
        cfg.alpha = alpha;
        cfg.decay = decay;
        cfg.max_depth = max_depth;
        cfg.eta = eta;
        cfg.lambda = lambda;
        cfg.train_length = train_length;
        cfg.test_length = test_length;
        cfg.replicates = replicates;
        cfg.seed = seed;
        cfg.max_leaves = max_leaves;
        cfg.models.clear();
        for (const auto& name : models) cfg.models.push_back(ModelSpec::parse(name));
        py::gil_scoped_release release;
        return format_report(run_experiment(cfg));
      },
      py::arg("vocab_size") = 10, py::arg("alpha") = 1.0, py::arg("decay") = 1.0, py::arg("max_depth") = 3,
      py::arg("eta") = 1.0, py::arg("lam") = 0.0, py::arg("train_length") = 10000, py::arg("test_length") = 1000,
      py::arg("replicates") = 15, py::arg("seed") = 1, py::arg("models") = std::vector<std::string>{"pbct"},
      py::arg("max_leaves") = 1000000, "Runs the simulation experiment and returns the tab-separated report.");
}
