#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "xmodal/error.hpp"
#include "xmodal/evalkit.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/sim.hpp"
#include "xmodal/store.hpp"

using namespace xmodal;
using evalkit::LabeledSet;
using evalkit::MinimalPairRecord;
using evalkit::MinPairTask;
using evalkit::TrialRecord;
using evalkit::TrialTask;

namespace {

errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return errc::internal;
}

LabeledSet labeled(std::vector<std::string> ids, std::size_t dim, std::vector<float> values,
                   std::vector<std::string> labels) {
  std::unordered_map<std::string, std::string> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = labels[i];
  return evalkit::make_labeled_set(store::make_matrix(std::move(ids), dim, std::move(values)), by_id);
}

LabeledSet random_labeled(std::size_t n, std::size_t classes, std::size_t dim, Rng& r,
                          double class_pull = 0.0) {
  std::vector<std::string> ids, labels;
  std::vector<float> values;
  std::vector<std::vector<double>> centers(classes, std::vector<double>(dim));
  for (auto& c : centers)
    for (auto& v : c) v = next_gaussian(r);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("x" + std::to_string(i));
    const std::size_t cls = i % classes;
    labels.push_back("class" + std::to_string(cls));
    for (std::size_t d = 0; d < dim; ++d)
      values.push_back(static_cast<float>(next_gaussian(r) + class_pull * centers[cls][d]));
  }
  return labeled(std::move(ids), dim, std::move(values), std::move(labels));
}

// every ordered class pair, every (X, A != X, B) triplet
double abx_exhaustive(const LabeledSet& set) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < set.labels.size(); ++i) by_label[set.labels[i]].push_back(i);
  std::vector<std::string> classes;
  for (const auto& [label, rows] : by_label) classes.push_back(label);
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& ca : classes)
    for (const auto& cb : classes) {
      if (ca == cb) continue;
      const auto& rows_a = by_label[ca];
      const auto& rows_b = by_label[cb];
      if (rows_a.size() < 2 || rows_b.empty()) continue;
      double credit = 0.0;
      std::size_t count = 0;
      for (const auto x : rows_a)
        for (const auto a : rows_a) {
          if (a == x) continue;
          for (const auto b : rows_b) {
            const double da = 1.0 - sim::cosine(set.matrix.row(x), set.matrix.row(a));
            const double db = 1.0 - sim::cosine(set.matrix.row(x), set.matrix.row(b));
            credit += da < db ? 1.0 : (da == db ? 0.5 : 0.0);
            ++count;
          }
        }
      total += credit / static_cast<double>(count);
      ++pairs;
    }
  return total / static_cast<double>(pairs);
}

store::EmbeddingMatrix unit_circle(std::vector<std::pair<std::string, double>> id_angles) {
  std::vector<std::string> ids;
  std::vector<float> values;
  for (auto& [id, angle] : id_angles) {
    ids.push_back(id);
    values.push_back(static_cast<float>(std::cos(angle)));
    values.push_back(static_cast<float>(std::sin(angle)));
  }
  return store::make_matrix(std::move(ids), 2, std::move(values));
}

TrialRecord one_caption(std::string caption, std::string img0, std::string img1, int correct) {
  TrialRecord t;
  t.trial_id = "t";
  t.task = TrialTask::noun;
  t.captions = {std::move(caption)};
  t.images = {std::move(img0), std::move(img1)};
  t.correct = correct;
  return t;
}

TrialRecord two_caption(std::string cap0, std::string cap1, std::string img0, std::string img1,
                        int correct) {
  TrialRecord t;
  t.trial_id = "t";
  t.task = TrialTask::word_order;
  t.captions = {std::move(cap0), std::move(cap1)};
  t.images = {std::move(img0), std::move(img1)};
  t.correct = correct;
  return t;
}

double softmax_kl(std::span<const double> model, std::span<const double> human, double t) {
  std::vector<double> q(model.size());
  double zmax = -1e300;
  for (const auto m : model) zmax = std::max(zmax, m / t);
  double z = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) z += q[i] = std::exp(model[i] / t - zmax);
  double kl = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i)
    if (human[i] > 0.0) kl += human[i] * std::log(human[i] / (q[i] / z));
  return kl;
}

// plain rank-then-Pearson reference with average ranks
std::vector<double> ranks_of(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("labeled set construction checks coverage") {
  auto m = store::make_matrix({"a", "b"}, 2, {1, 0, 0, 1});
  std::unordered_map<std::string, std::string> labels{{"a", "cat"}};
  CHECK(thrown_code([&] { evalkit::make_labeled_set(m, labels); }) == errc::missing_field);
  labels["b"] = "dog";
  const auto set = evalkit::make_labeled_set(m, labels);
  CHECK(set.labels == std::vector<std::string>{"cat", "dog"});
}

TEST_CASE("abx equals exhaustive enumeration on small sets") {
  Rng r(31337);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t classes = 2 + r.below(3);
    const std::size_t n = std::max<std::size_t>(2 * classes, 4 + r.below(9));  // <= 12 items
    auto set = random_labeled(std::min<std::size_t>(n, 12), classes, 3, r, 1.0);
    // a huge per-pair budget forces the exhaustive path
    const double got = evalkit::abx_accuracy(set, 1000000, 1);
    const double want = abx_exhaustive(set);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("abx sampling is seed-deterministic and seed-sensitive") {
  Rng r(555);
  auto set = random_labeled(60, 3, 4, r, 0.8);
  const double a = evalkit::abx_accuracy(set, 50, 42);
  CHECK(a == evalkit::abx_accuracy(set, 50, 42));
  bool differs = false;
  for (std::uint64_t seed = 43; seed < 48 && !differs; ++seed)
    differs = evalkit::abx_accuracy(set, 50, seed) != a;
  CHECK(differs);
}

TEST_CASE("abx on random labels sits near chance") {
  double mean = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng r(1000 + s);
    auto set = random_labeled(40, 2, 8, r, 0.0);  // labels carry no signal
    mean += evalkit::abx_accuracy(set, 200, 9000 + s);
  }
  mean /= seeds;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.1));  // +-0.05 absolute
  CHECK(std::abs(mean - 0.5) < 0.05);
}

TEST_CASE("abx separates disjoint clusters perfectly") {
  // class a along +x, class b along +y: ABX must be 1.0 exactly
  auto set = labeled({"a1", "a2", "a3", "b1", "b2", "b3"}, 2,
                     {1, 0.01f, 1, -0.01f, 1, 0.02f, 0.01f, 1, -0.01f, 1, 0.02f, 1},
                     {"a", "a", "a", "b", "b", "b"});
  CHECK(evalkit::abx_accuracy(set, 1000, 7) == 1.0);
}

TEST_CASE("abx error cases") {
  auto one_class = labeled({"a1", "a2"}, 2, {1, 0, 0, 1}, {"a", "a"});
  CHECK(thrown_code([&] { evalkit::abx_accuracy(one_class, 10, 1); }) == errc::class_too_small);
  auto singleton = labeled({"a1", "b1"}, 2, {1, 0, 0, 1}, {"a", "b"});
  CHECK(thrown_code([&] { evalkit::abx_accuracy(singleton, 10, 1); }) == errc::class_too_small);
  auto ok = labeled({"a1", "a2", "b1"}, 2, {1, 0, 1, 0.1f, 0, 1}, {"a", "a", "b"});
  CHECK(thrown_code([&] { evalkit::abx_accuracy(ok, 0, 1); }) == errc::config_invalid);
}

TEST_CASE("knn vote matches a hand-checked softmax tally") {
  // neighbours of the query (1,0): a1 cos=1, b1 cos=0.8, b2 cos=0.6
  auto train = labeled({"a1", "b1", "b2"}, 2,
                       {1, 0, 0.8f, 0.6f, 0.6f, 0.8f}, {"A", "B", "B"});
  const std::vector<float> query{1, 0};
  // k=1: only a1 votes
  CHECK(evalkit::knn_predict(train, query, 1) == "A");
  // k=3 at high temperature: votes ~equal weight, B wins 2-to-1
  CHECK(evalkit::knn_predict(train, query, 3, 1000.0) == "B");
  // k=3 at low temperature: a1's exp(1/t) dwarfs both B votes
  CHECK(evalkit::knn_predict(train, query, 3, 0.05) == "A");
}

TEST_CASE("knn tie handling is lexicographic") {
  // two classes at identical cosine to the query; vote weights tie exactly
  auto train = labeled({"n1", "n2"}, 2, {1, 0, 1, 0}, {"zebra", "aardvark"});
  const std::vector<float> q{1, 0};
  CHECK(evalkit::knn_predict(train, q, 2) == "aardvark");
  // neighbour selection ties break by ascending item id: with k=1 the single
  // slot goes to n1 -> zebra
  CHECK(evalkit::knn_predict(train, q, 1) == "zebra");
}

TEST_CASE("knn is invariant to training row order") {
  Rng r(8181);
  auto a = random_labeled(30, 3, 4, r, 0.5);
  // rebuild with rows reversed
  std::vector<std::string> ids(a.matrix.item_ids.rbegin(), a.matrix.item_ids.rend());
  std::vector<std::string> labels(a.labels.rbegin(), a.labels.rend());
  std::vector<float> values;
  for (std::size_t i = a.matrix.rows(); i-- > 0;) {
    const auto row = a.matrix.row(i);
    values.insert(values.end(), row.begin(), row.end());
  }
  std::unordered_map<std::string, std::string> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = labels[i];
  auto b = evalkit::make_labeled_set(store::make_matrix(ids, 4, values), by_id);
  for (int q = 0; q < 20; ++q) {
    std::vector<float> query;
    for (int d = 0; d < 4; ++d) query.push_back(static_cast<float>(next_gaussian(r)));
    CHECK(evalkit::knn_predict(a, query, 5) == evalkit::knn_predict(b, query, 5));
  }
}

TEST_CASE("knn validates parameters") {
  auto train = labeled({"a"}, 2, {1, 0}, {"A"});
  std::vector<float> q{1, 0};
  CHECK(thrown_code([&] { evalkit::knn_predict(train, q, 2); }) == errc::k_too_large);
  CHECK(thrown_code([&] { evalkit::knn_predict(train, q, 0); }) == errc::k_too_large);
  CHECK(thrown_code([&] { evalkit::knn_predict(train, q, 1, 0.0); }) == errc::config_invalid);
  auto empty = evalkit::make_labeled_set(store::make_matrix({}, 2, {}), {});
  CHECK(thrown_code([&] { evalkit::knn_predict(empty, q, 1); }) == errc::empty_train);
  std::vector<float> bad{1, 0, 0};
  CHECK(thrown_code([&] { evalkit::knn_predict(train, bad, 1); }) == errc::dim_mismatch);
}

TEST_CASE("one-caption trials score by argmax cosine") {
  auto text = unit_circle({{"cap", 0.0}});
  auto visual = unit_circle({{"img0", 0.1}, {"img1", 1.0}});
  const auto right = evalkit::score_trial(one_caption("cap", "img0", "img1", 0), text, visual);
  CHECK(right.credit == 1.0);
  CHECK(right.correct);
  CHECK(right.margin == doctest::Approx(std::cos(0.1) - std::cos(1.0)).epsilon(1e-6));
  const auto wrong = evalkit::score_trial(one_caption("cap", "img0", "img1", 1), text, visual);
  CHECK(wrong.credit == 0.0);
  CHECK_FALSE(wrong.correct);
  CHECK(wrong.margin == doctest::Approx(std::cos(1.0) - std::cos(0.1)).epsilon(1e-6));
}

TEST_CASE("one-caption exact ties earn half credit") {
  auto text = unit_circle({{"cap", 0.0}});
  // identical images -> identical cosines bitwise
  auto visual = store::make_matrix({"img0", "img1"}, 2, {0.6f, 0.8f, 0.6f, 0.8f});
  const auto s = evalkit::score_trial(one_caption("cap", "img0", "img1", 0), text, visual);
  CHECK(s.credit == 0.5);
  CHECK(s.margin == 0.0);
}

TEST_CASE("two-caption trials compare bipartite matchings") {
  auto text = unit_circle({{"cap0", 0.0}, {"cap1", 1.5}});
  auto visual = unit_circle({{"img0", 0.1}, {"img1", 1.4}});
  // aligned matching: cos(0.1)+cos(0.1) far above crossed cos(1.4)+cos(1.3)
  const auto s = evalkit::score_trial(two_caption("cap0", "cap1", "img0", "img1", 0), text, visual);
  CHECK(s.credit == 1.0);
  const double aligned = std::cos(0.1) + std::cos(0.1);
  const double crossed = std::cos(1.4) + std::cos(1.5 - 0.1);
  CHECK(s.margin == doctest::Approx(aligned - crossed).epsilon(1e-6));
  // claiming the crossed matching is right flips the credit
  const auto flipped = evalkit::score_trial(two_caption("cap0", "cap1", "img0", "img1", 1), text, visual);
  CHECK(flipped.credit == 0.0);
}

TEST_CASE("two-caption scoring agrees with a both-matchings oracle") {
  Rng r(246810);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<float> values;
    for (int i = 0; i < 8; ++i) values.push_back(static_cast<float>(next_gaussian(r)));
    auto text = store::make_matrix({"c0", "c1"}, 2, {values[0], values[1], values[2], values[3]});
    auto visual = store::make_matrix({"i0", "i1"}, 2, {values[4], values[5], values[6], values[7]});
    const int correct = static_cast<int>(r.below(2));
    const auto s = evalkit::score_trial(two_caption("c0", "c1", "i0", "i1", correct), text, visual);
    const double aligned = sim::cosine(text.row(0), visual.row(0)) + sim::cosine(text.row(1), visual.row(1));
    const double crossed = sim::cosine(text.row(0), visual.row(1)) + sim::cosine(text.row(1), visual.row(0));
    const double right = correct == 0 ? aligned : crossed;
    const double other = correct == 0 ? crossed : aligned;
    const double want = right > other ? 1.0 : (right == other ? 0.5 : 0.0);
    CHECK(s.credit == want);
    CHECK(s.margin == doctest::Approx(right - other).epsilon(1e-12));
  }
}

TEST_CASE("trial validation") {
  auto text = unit_circle({{"cap", 0.0}});
  auto visual = unit_circle({{"img0", 0.1}, {"img1", 1.0}});
  auto bad_images = one_caption("cap", "img0", "img0", 0);
  CHECK(thrown_code([&] { evalkit::score_trial(bad_images, text, visual); }) == errc::malformed_record);
  auto bad_correct = one_caption("cap", "img0", "img1", 2);
  CHECK(thrown_code([&] { evalkit::score_trial(bad_correct, text, visual); }) == errc::malformed_record);
  auto dangling = one_caption("nope", "img0", "img1", 0);
  CHECK(thrown_code([&] { evalkit::score_trial(dangling, text, visual); }) == errc::dangling_id);
}

TEST_CASE("per-bin accuracy spans the seen range with gaps as null") {
  std::vector<TrialRecord> trials;
  std::vector<double> credits;
  auto push = [&](int bin, double credit) {
    TrialRecord t = one_caption("c", "i0", "i1", 0);
    t.frequency_bin = bin;
    trials.push_back(t);
    credits.push_back(credit);
  };
  push(2, 1.0);
  push(2, 0.0);
  push(5, 1.0);
  const auto by_bin = evalkit::accuracy_by_bin(trials, credits);
  REQUIRE(by_bin.size() == 4);  // bins 2..5 inclusive
  CHECK(by_bin.at(2).value() == 0.5);
  CHECK_FALSE(by_bin.at(3).has_value());
  CHECK_FALSE(by_bin.at(4).has_value());
  CHECK(by_bin.at(5).value() == 1.0);
  CHECK(thrown_code([&] { evalkit::accuracy_by_bin(trials, std::vector<double>{1.0}); }) ==
        errc::length_mismatch);
}

TEST_CASE("minimal pair credit covers the full sign table") {
  auto rec = [](MinPairTask task, double s1, double s1a, std::optional<double> s2 = std::nullopt,
                std::optional<double> s2a = std::nullopt) {
    MinimalPairRecord r;
    r.pair_id = "p";
    r.task = task;
    r.logp_s1 = s1;
    r.logp_s1_alt = s1a;
    r.logp_s2 = s2;
    r.logp_s2_alt = s2a;
    return r;
  };
  // pairwise task: strict inequality only
  CHECK(evalkit::minimal_pair_credit(rec(MinPairTask::zorro, -1.0, -2.0)) == 1.0);
  CHECK(evalkit::minimal_pair_credit(rec(MinPairTask::zorro, -2.0, -1.0)) == 0.0);
  CHECK(evalkit::minimal_pair_credit(rec(MinPairTask::zorro, -1.0, -1.0)) == 0.0);
  // quadruplet conjunction: exhaustive over both comparisons' sign patterns
  for (const int c1 : {-1, 0, 1})
    for (const int c2 : {-1, 0, 1}) {
      const double want = (c1 > 0 && c2 > 0) ? 1.0 : 0.0;
      const auto r = rec(MinPairTask::wordswap, -1.0, -1.0 - c1, -3.0, -3.0 - c2);
      CHECK(evalkit::minimal_pair_credit(r) == want);
    }
  // credit is invariant to a constant shift of all log probabilities
  const auto base = rec(MinPairTask::agrswap, -1.0, -2.0, -0.5, -4.0);
  auto shifted = base;
  shifted.logp_s1 += 100.0;
  shifted.logp_s1_alt += 100.0;
  *shifted.logp_s2 += 100.0;
  *shifted.logp_s2_alt += 100.0;
  CHECK(evalkit::minimal_pair_credit(base) == evalkit::minimal_pair_credit(shifted));
  // quadruplet tasks demand the second sentence pair
  auto missing = rec(MinPairTask::vpswap, -1.0, -2.0);
  CHECK(thrown_code([&] { evalkit::minimal_pair_credit(missing); }) == errc::missing_field);
  // zorro ignores any stray second pair
  CHECK(evalkit::minimal_pair_credit(rec(MinPairTask::zorro, -1.0, -2.0, -9.0, -1.0)) == 1.0);
}

TEST_CASE("minimal pair accuracy groups by task") {
  std::vector<MinimalPairRecord> records;
  auto add = [&](MinPairTask task, double s1, double s1a) {
    MinimalPairRecord r;
    r.pair_id = "p" + std::to_string(records.size());
    r.task = task;
    r.logp_s1 = s1;
    r.logp_s1_alt = s1a;
    if (evalkit::is_quadruplet(task)) {
      r.logp_s2 = s1;
      r.logp_s2_alt = s1a;
    }
    records.push_back(r);
  };
  add(MinPairTask::zorro, -1, -2);
  add(MinPairTask::zorro, -2, -1);
  add(MinPairTask::wordswap, -1, -2);
  const auto acc = evalkit::minimal_pair_accuracy(records);
  REQUIRE(acc.size() == 2);
  CHECK(acc.at(MinPairTask::zorro) == 0.5);
  CHECK(acc.at(MinPairTask::wordswap) == 1.0);
  CHECK(thrown_code([&] { evalkit::minimal_pair_accuracy({}); }) == errc::empty_samples);
}

TEST_CASE("minpair task names round trip") {
  for (const auto t : {MinPairTask::zorro, MinPairTask::wordswap, MinPairTask::inflswap,
                       MinPairTask::agrswap, MinPairTask::vpswap})
    CHECK(evalkit::parse_minpair_task(evalkit::minpair_task_name(t)) == t);
  CHECK(evalkit::is_quadruplet(MinPairTask::zorro) == false);
  CHECK(evalkit::is_quadruplet(MinPairTask::wordswap) == true);
  CHECK(thrown_code([] { evalkit::parse_minpair_task("nonsense"); }) == errc::malformed_record);
}

TEST_CASE("trial task and style names round trip") {
  for (const auto t : {TrialTask::noun, TrialTask::adjective, TrialTask::subj_verb,
                       TrialTask::subj_adj, TrialTask::negation, TrialTask::word_order,
                       TrialTask::prepositions, TrialTask::comparatives, TrialTask::counting,
                       TrialTask::relative})
    CHECK(evalkit::parse_trial_task(evalkit::trial_task_name(t)) == t);
  CHECK(evalkit::parse_trial_style("cartoon") == evalkit::TrialStyle::cartoon);
  CHECK(thrown_code([] { evalkit::parse_trial_task("verbs"); }) == errc::malformed_record);
}

TEST_CASE("human similarity KL at a fixed temperature is hand-checkable") {
  // model [2,0], t=1: softmax = [e^2, 1]/(e^2+1); human [0.5, 0.5]
  const std::vector<double> model{2.0, 0.0};
  const std::vector<double> human{0.5, 0.5};
  const double got = softmax_kl(model, human, 1.0);
  const double z = std::exp(2.0) + 1.0;
  const double want = 0.5 * std::log(0.5 / (std::exp(2.0) / z)) + 0.5 * std::log(0.5 / (1.0 / z));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("human similarity matches a dense temperature grid") {
  Rng r(13579);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + r.below(6);
    std::vector<double> model, human;
    double hsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      model.push_back(2.0 * r.next_double() - 1.0);
      const double h = 0.05 + r.next_double();
      human.push_back(h);
      hsum += h;
    }
    for (auto& h : human) h /= hsum;
    const auto got = evalkit::human_similarity(model, human);
    // 1e-3 log-step grid over the documented search window
    double best = 1e300;
    for (double lg = -6.0; lg <= 6.0 + 1e-12; lg += 1e-3)
      best = std::min(best, softmax_kl(model, human, std::exp(lg)));
    // multimodal kl-over-t landscapes let the grid edge out golden section,
    // so only the 1e-4 agreement window is asserted
    CHECK(std::abs(got.kl - best) < 1e-4);
    CHECK(got.sim == doctest::Approx(1.0 / (1.0 + got.kl)).epsilon(1e-12));
    CHECK_FALSE(got.degenerate);
  }
}

TEST_CASE("human similarity exact fit reaches zero KL") {
  // human = softmax(model/2): optimum sits inside the window, kl -> ~0
  const std::vector<double> model{1.0, 0.5, -0.5, 0.2};
  std::vector<double> human(model.size());
  double z = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) z += human[i] = std::exp(model[i] / 2.0);
  for (auto& h : human) h /= z;
  const auto got = evalkit::human_similarity(model, human);
  CHECK(got.kl < 1e-9);
  CHECK(got.temperature == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(got.sim == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("degenerate model scores fall back to the uniform fit") {
  const std::vector<double> model{0.7, 0.7, 0.7};
  const std::vector<double> human{0.6, 0.3, 0.1};
  const auto got = evalkit::human_similarity(model, human);
  CHECK(got.degenerate);
  // softmax of a constant vector is uniform at every temperature
  double want = 0.0;
  for (const auto h : human) want += h * std::log(h * 3.0);
  CHECK(got.kl == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("human similarity validates inputs") {
  std::vector<double> model{1.0, 2.0};
  CHECK(thrown_code([&] { evalkit::human_similarity(model, std::vector<double>{1.0}); }) ==
        errc::length_mismatch);
  CHECK(thrown_code([&] { evalkit::human_similarity(model, std::vector<double>{0.2, 0.3}); }) ==
        errc::not_normalized);
  CHECK(thrown_code([&] { evalkit::human_similarity(model, std::vector<double>{-0.2, 1.2}); }) ==
        errc::not_normalized);
  CHECK(thrown_code([&] {
          evalkit::human_similarity(std::vector<double>{1.0}, std::vector<double>{1.0});
        }) == errc::empty_samples);
}

TEST_CASE("spearman hits plus and minus one on monotone data") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> up{0.1, 0.5, 0.9, 2.0, 100.0};     // any increasing map
  const std::vector<double> down{3.0, 1.0, 0.0, -2.0, -50.0};  // any decreasing map
  CHECK(evalkit::spearman(x, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(evalkit::spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman uses average ranks on ties") {
  // ranks of [1,2,2,3] are [1, 2.5, 2.5, 4]
  const std::vector<double> a{1.0, 2.0, 2.0, 3.0};
  const std::vector<double> b{10.0, 20.0, 30.0, 40.0};
  const auto ra = ranks_of(a);
  CHECK(ra == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  CHECK(evalkit::spearman(a, b) == doctest::Approx(pearson(ra, ranks_of(b))).epsilon(1e-12));
}

TEST_CASE("spearman equals rank-then-pearson on random data") {
  Rng r(97531);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + r.below(30);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(r.below(10) / 3.0);  // coarse values produce plenty of ties
      b.push_back(r.below(10) / 3.0);
    }
    const auto ra = ranks_of(a);
    const auto rb = ranks_of(b);
    double sbb = 0.0, saa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      saa += (ra[i] - ra[0]) * (ra[i] - ra[0]);
      sbb += (rb[i] - rb[0]) * (rb[i] - rb[0]);
    }
    if (saa == 0.0 || sbb == 0.0) continue;  // constant after ranking: undefined
    CHECK(evalkit::spearman(a, b) == doctest::Approx(pearson(ra, rb)).epsilon(1e-9));
  }
}

TEST_CASE("spearman validates input") {
  CHECK(thrown_code([] {
          evalkit::spearman(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0});
        }) == errc::length_mismatch);
  CHECK(thrown_code([] {
          evalkit::spearman(std::vector<double>{1.0}, std::vector<double>{1.0});
        }) == errc::too_few_items);
  CHECK(thrown_code([] {
          evalkit::spearman(std::vector<double>{1.0, 1.0, 1.0}, std::vector<double>{1.0, 2.0, 3.0});
        }) == errc::empty_samples);
}

TEST_CASE("rsa reaches plus one on an agreeing dissimilarity matrix") {
  // four points on the unit circle; human matrix = exact cosine distances
  auto model = unit_circle({{"p0", 0.0}, {"p1", 0.4}, {"p2", 1.1}, {"p3", 2.0}});
  const std::size_t n = 4;
  std::vector<std::vector<double>> human(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      human[i][j] = i == j ? 0.0 : 1.0 - sim::cosine(model.row(i), model.row(j));
  CHECK(evalkit::rsa_spearman(model, human) == doctest::Approx(1.0).epsilon(1e-12));
  // any strictly increasing transform preserves the ranks exactly
  auto warped = human;
  for (auto& row : warped)
    for (auto& v : row) v = std::exp(3.0 * v) - 1.0;
  CHECK(evalkit::rsa_spearman(model, warped) == doctest::Approx(1.0).epsilon(1e-12));
  // a strictly decreasing transform flips the sign
  auto flipped = human;
  for (auto& row : flipped)
    for (auto& v : row) v = 10.0 - v;
  for (std::size_t i = 0; i < n; ++i) flipped[i][i] = 0.0;
  CHECK(evalkit::rsa_spearman(model, flipped) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rsa matches a rank-then-pearson oracle on random inputs") {
  Rng r(1029384756);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + r.below(6);
    std::vector<std::string> ids;
    std::vector<float> values;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("m" + std::to_string(i));
      for (int d = 0; d < 5; ++d) values.push_back(static_cast<float>(next_gaussian(r)));
    }
    auto model = store::make_matrix(ids, 5, values);
    std::vector<std::vector<double>> human(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) human[i][j] = human[j][i] = r.next_double();
    std::vector<double> mvec, hvec;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        mvec.push_back(1.0 - sim::cosine(model.row(i), model.row(j)));
        hvec.push_back(human[i][j]);
      }
    const auto ra = ranks_of(mvec);
    const auto rb = ranks_of(hvec);
    CHECK(evalkit::rsa_spearman(model, human) == doctest::Approx(pearson(ra, rb)).epsilon(1e-9));
  }
}

TEST_CASE("rsa validates the human matrix") {
  auto model = unit_circle({{"p0", 0.0}, {"p1", 1.0}, {"p2", 2.0}});
  std::vector<std::vector<double>> wrong_size(2, std::vector<double>(2, 0.0));
  CHECK(thrown_code([&] { evalkit::rsa_spearman(model, wrong_size); }) == errc::length_mismatch);
  std::vector<std::vector<double>> asym(3, std::vector<double>(3, 0.0));
  asym[0][1] = 0.5;
  asym[1][0] = 0.25;
  CHECK(thrown_code([&] { evalkit::rsa_spearman(model, asym); }) == errc::malformed_record);
  std::vector<std::vector<double>> diag(3, std::vector<double>(3, 0.0));
  diag[0][1] = diag[1][0] = 0.5;
  diag[0][2] = diag[2][0] = 0.25;
  diag[1][2] = diag[2][1] = 0.75;
  diag[1][1] = 0.1;
  CHECK(thrown_code([&] { evalkit::rsa_spearman(model, diag); }) == errc::malformed_record);
}
