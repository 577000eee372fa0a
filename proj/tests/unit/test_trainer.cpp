#include <doctest.h>

#include <cmath>
#include <random>

#include "dialseg/corpus_io.hpp"
#include "dialseg/errors.hpp"
#include "dialseg/metrics.hpp"
#include "dialseg/pipeline.hpp"
#include "dialseg/trainer.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace dialseg;

namespace {

// Unit vector in the plane at the given angle, padded with zeros.
Eigen::VectorXd at_angle(double radians, Eigen::Index d = 3) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(0) = std::cos(radians);
  v(1) = std::sin(radians);
  return v;
}

Eigen::MatrixXd columns(std::initializer_list<Eigen::VectorXd> cols) {
  Eigen::MatrixXd m(cols.begin()->size(), static_cast<Eigen::Index>(cols.size()));
  Eigen::Index c = 0;
  for (const auto& v : cols) m.col(c++) = v;
  return m;
}

double corpus_pk(const Heads& heads, const std::vector<Dialogue>& corpus,
                 const TrainingCorpus& embedded, const TrainConfig& config) {
  const auto pseudo = pseudo_segment(heads, embedded, config);
  std::vector<LabeledSegmentation> hyps;
  for (std::size_t d = 0; d < corpus.size(); ++d) hyps.push_back({corpus[d].id(), pseudo[d]});
  return evaluate_corpus(gold_segmentations(corpus), hyps).pk;
}

}  // namespace

TEST_CASE("NUM loss examples") {
  const Eigen::VectorXd anchor = at_angle(0);
  const Eigen::MatrixXd pos = columns({at_angle(std::acos(0.9))});
  const Eigen::MatrixXd neg = columns({at_angle(std::acos(0.1))});
  CHECK(num_loss(anchor, pos, neg, 1.0) == doctest::Approx(0.2).epsilon(1e-12));

  const Eigen::MatrixXd far_neg = columns({at_angle(M_PI)});
  CHECK(num_loss(anchor, columns({at_angle(0.1)}), far_neg, 1.0) == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(4);
    Eigen::MatrixXd p(4, 2), q(4, 2);
    for (int r = 0; r < 4; ++r) {
      a(r) = g(rng);
      p(r, 0) = g(rng);
      p(r, 1) = g(rng);
      q(r, 0) = g(rng);
      q(r, 1) = g(rng);
    }
    double want = 0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        want += std::max(0.0, 0.7 + oracle::naive_cosine(a, q.col(j)) - oracle::naive_cosine(a, p.col(i)));
      }
    }
    CHECK(num_loss(a, p, q, 0.7) == doctest::Approx(want / 4).epsilon(1e-12));
  }
  CHECK_THROWS_AS(num_loss(anchor, Eigen::MatrixXd(3, 0), neg, 1.0), InvalidArgument);
}

TEST_CASE("RM loss examples") {
  CHECK(rm_loss(1.3, 0.1, 1.0) == 0.0);
  CHECK(rm_loss(0.5, 0.5, 0.8) == 0.8);
  CHECK(rm_loss(0.4, 0.3, 1.0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("total loss weighting") {
  TrainConfig cfg;
  const std::vector<double> num{0.1, 0.3};
  const std::vector<double> rm{0.9};
  CHECK(total_loss(num, rm, cfg) == doctest::Approx(1.1));
  cfg.rm_weight = 0;
  CHECK(total_loss(num, rm, cfg) == doctest::Approx(0.2));
  cfg.rm_weight = 1;
  cfg.num_weight = 0;
  CHECK(total_loss(num, rm, cfg) == doctest::Approx(0.9));
  CHECK(total_loss({}, rm, cfg) == doctest::Approx(0.9));
  CHECK_THROWS_AS(total_loss({}, {}, cfg), InvalidArgument);
}

TEST_CASE("batch loss matches the scalar oracle and hinges are nonnegative") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = gradcheck::random_batch(rng);
    const auto eval = evaluate_batch(b.heads, b.corpus, b.num, b.rm, b.config, false);
    CHECK(eval.loss == doctest::Approx(gradcheck::oracle_loss(b.heads, b).loss).epsilon(1e-12));
    for (double t : eval.num_terms) CHECK(t >= 0.0);
    for (double t : eval.rm_terms) CHECK(t >= 0.0);
    if (eval.loss == 0.0) {
      for (double t : eval.num_terms) CHECK(t == 0.0);
      for (double t : eval.rm_terms) CHECK(t == 0.0);
    }
  }
}

TEST_CASE("analytic gradient matches central differences on every parameter") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const auto b = gradcheck::smooth_random_batch(rng, 1e-3);
    const auto result = gradcheck::check_all_parameters(b, 1e-5);
    INFO("worst parameter " << result.worst_parameter);
    CHECK(result.worst_relative_error < 1e-4);
  }
}

TEST_CASE("saturated batch has exactly zero gradient") {
  std::mt19937_64 rng(5);
  auto b = gradcheck::random_batch(rng);
  b.config.margin = 1e-9;
  const Eigen::Index d = b.heads.base_dimension();
  b.heads.projection = ProjectionHeadd::identity(d);
  b.heads.coherence = CoherenceHeadd::zero(d);
  // Utterances 1..4 point one way and 5..6 the opposite way, so positives and
  // the real right window agree with the anchor while negatives and the
  // synthetic right window oppose it.
  TrainingCorpus corpus;
  corpus.ids = {"s"};
  Eigen::MatrixXd base(d, 6);
  for (int c = 0; c < 6; ++c) base.col(c) = (c < 4 ? 1.0 : -1.0) * Eigen::VectorXd::Ones(d);
  corpus.base = {base};
  std::vector<NumSample> num{{0, {1, {2, 3}, {5, 6}}}};
  std::vector<RmFragmentPair> rm{{0, 2, 0, 5, RmScheme::Intra}};
  const auto eval = evaluate_batch(b.heads, corpus, num, rm, b.config, true);
  CHECK(eval.loss == 0.0);
  CHECK(eval.gradient.is_zero());
}

TEST_CASE("NUM gradients leave the coherence head alone") {
  std::mt19937_64 rng(8);
  auto b = gradcheck::random_batch(rng);
  const auto eval = evaluate_batch(b.heads, b.corpus, b.num, {}, b.config, true);
  CHECK(eval.gradient.M.isZero(0.0));
}

TEST_CASE("a small SGD step does not increase a positive batch loss") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = gradcheck::smooth_random_batch(rng, 1e-3);
    const auto before = evaluate_batch(b.heads, b.corpus, b.num, b.rm, b.config, true);
    if (before.loss <= 0.0) continue;
    Heads stepped = b.heads;
    stepped.projection.weight -= 1e-4 * before.gradient.weight;
    stepped.projection.bias -= 1e-4 * before.gradient.bias;
    stepped.coherence.M -= 1e-4 * before.gradient.M;
    const auto after = evaluate_batch(stepped, b.corpus, b.num, b.rm, b.config, false);
    CHECK(after.loss <= before.loss);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("parameter views cover every head entry once") {
  auto heads = Heads::initialized(3, 2, 1);
  CHECK(parameter_count(heads) == 6 + 2 + 9);
  parameter(heads, 6) = 5.0;
  CHECK(heads.projection.bias(0) == 5.0);
  parameter(heads, 8 + 3) = -1.0;
  CHECK(heads.coherence.M(0, 1) == -1.0);
  CHECK(parameter_name(heads, 1) == "weight(1,0)");
  CHECK_THROWS_AS(parameter(heads, 17), InvalidArgument);
}

namespace {

std::vector<Dialogue> two_block_corpus() {
  SyntheticSpec spec;
  spec.dialogues = 12;
  spec.segments_per_dialogue = {2, 2};
  spec.utterances_per_segment = {4, 6};
  spec.adjacent_overlap = 0.25;
  spec.seed = 5;
  return generate_synthetic(spec);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.topic_dimension = 16;
  cfg.batch_size = 16;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("one epoch on two-block dialogues keeps Pk from rising") {
  const auto corpus = two_block_corpus();
  LexicalHashProvider provider(64, 0);
  auto cfg = small_config();
  cfg.epochs = 1;
  const auto embedded = TrainingCorpus::embed(corpus, provider, 1);
  const auto initial = Heads::initialized(64, cfg.topic_dimension, cfg.seed);
  const auto trained = train(corpus, embedded, cfg);
  REQUIRE(trained.report.epochs.size() == 1);
  CHECK(std::isfinite(trained.report.epochs[0].total_loss));
  CHECK(trained.report.epochs[0].gradient_check != GradientCheck::Failed);
  CHECK(corpus_pk(trained.heads, corpus, embedded, cfg) <= corpus_pk(initial, corpus, embedded, cfg));
}

TEST_CASE("zero learning rate leaves parameters and losses unchanged") {
  const auto corpus = two_block_corpus();
  LexicalHashProvider provider(64, 0);
  auto cfg = small_config();
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  const auto result = train(corpus, provider, cfg);
  CHECK(result.heads == Heads::initialized(64, cfg.topic_dimension, cfg.seed));
  const auto& e = result.report.epochs;
  REQUIRE(e.size() == 3);
  for (const auto& r : e) {
    CHECK(r.total_loss == e[0].total_loss);
    CHECK(r.num_loss == e[0].num_loss);
    CHECK(r.rm_loss == e[0].rm_loss);
  }
}

TEST_CASE("training is deterministic and independent of thread count") {
  const auto corpus = two_block_corpus();
  LexicalHashProvider provider(64, 0);
  auto cfg = small_config();
  cfg.epochs = 2;
  const auto a = train(corpus, provider, cfg);
  cfg.jobs = 4;
  const auto b = train(corpus, provider, cfg);
  CHECK(a.heads == b.heads);
  REQUIRE(a.report.epochs.size() == b.report.epochs.size());
  for (std::size_t k = 0; k < a.report.epochs.size(); ++k) {
    CHECK(a.report.epochs[k].total_loss == b.report.epochs[k].total_loss);
    CHECK(a.report.epochs[k].num_anchors == b.report.epochs[k].num_anchors);
  }
}

TEST_CASE("training configuration errors") {
  const auto corpus = two_block_corpus();
  LexicalHashProvider provider(64, 0);
  auto cfg = small_config();
  cfg.margin = 0;
  CHECK_THROWS_AS(train(corpus, provider, cfg), InvalidArgument);
  cfg = small_config();
  CHECK_THROWS_AS(train({}, provider, cfg), InvalidArgument);
  CHECK_THROWS_AS(train(corpus, provider, cfg, Heads::initialized(32, 8, 0)), InvalidArgument);
}
