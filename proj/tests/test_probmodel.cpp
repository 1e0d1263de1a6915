#include "epimine/probmodel.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace epimine;

namespace {

// Alphabet {a, b, c} with p(a) = 1/2, p(b) = p(c) = 1/4.
struct ToyModel {
  Alphabet alphabet;
  SymbolId a = -1, b = -1, c = -1;
  SymbolModel model;

  ToyModel() : model(make()) {}

 private:
  std::vector<Rational> make() {
    auto ids = testutil::letters(alphabet, 3);
    a = ids[0];
    b = ids[1];
    c = ids[2];
    return {Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  }
};

}  // namespace

TEST_CASE("estimate_model counts exactly") {
  Alphabet alphabet;
  SymbolSequence s = sequence_from_chars("aab", alphabet);
  SymbolModel model = estimate_model(s, alphabet.size());
  CHECK(model.probability(alphabet.id_of("a")) == Rational(2, 3));
  CHECK(model.probability(alphabet.id_of("b")) == Rational(1, 3));
  CHECK_THROWS_AS(estimate_model(SymbolSequence(), 1), std::invalid_argument);
}

TEST_CASE("estimate_model approaches the generator frequencies") {
  Alphabet alphabet;
  SymbolSequence s = gen_uniform(10, 200000, 11, alphabet);
  SymbolModel model = estimate_model(s, alphabet.size());
  for (SymbolId d = 0; d < 10; ++d) {
    double p = to_double(model.probability(d));
    CHECK(p > 0.09);
    CHECK(p < 0.11);
  }
}

TEST_CASE("model constructor enforces the exact sum") {
  CHECK_THROWS_AS(SymbolModel({Rational(1, 2), Rational(1, 4)}), std::invalid_argument);
  CHECK_THROWS_AS(SymbolModel({Rational(3, 2), Rational(-1, 2)}), std::invalid_argument);
}

TEST_CASE("guard_mass") {
  ToyModel t;
  CHECK(guard_mass(t.model, EdgeGuard::any()) == Rational(1));
  CHECK(guard_mass(t.model, EdgeGuard::complement({t.a})) == Rational(1, 2));
  CHECK(guard_mass(t.model, EdgeGuard::label_set({t.b, t.c})) == Rational(1, 2));
  // Scaled view stays consistent with the rational view.
  CHECK(make_rational(guard_mass_scaled(t.model, EdgeGuard::complement({t.b})),
                      t.model.common_denominator()) == Rational(3, 4));
}

TEST_CASE("cover_table on the two-step chain") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
  MachineSuite suite = MachineSuite::build(family);
  CoverTable cov(suite.simple, t.model, 6);

  int sa = suite.singleton_state[static_cast<size_t>(*family.find(Episode::single(t.a)))];
  int sab = suite.singleton_state[static_cast<size_t>(*family.find(Episode::serial({t.a, t.b})))];
  int init = suite.simple.initial();

  for (int k = 0; k <= 6; ++k) {
    CHECK(cov.value(init, k) == Rational(1));
    CHECK(cov.value(sa, k) == Rational(1) - testutil::rational_pow(Rational(1, 2), k));
  }
  CHECK(cov.value(sab, 0) == Rational(0));
  CHECK(cov.value(sab, 1) == Rational(0));
  CHECK(cov.value(sab, 3) == Rational(9, 32));
}

TEST_CASE("cover_table is monotone in k and bounded by one") {
  ToyModel t;
  Episode mixed({t.a, t.b, t.a}, {{1, 2}});
  EpisodeFamily family = closure({mixed, Episode::parallel({t.a, t.a})});
  MachineSuite suite = MachineSuite::build(family);
  for (const LabeledMachine* m : {&suite.simple, &suite.co}) {
    CoverTable cov(*m, t.model, 8);
    for (int v = 0; v < m->state_count(); ++v) {
      for (int k = 0; k <= 8; ++k) {
        CHECK(cov.value(v, k) >= 0);
        CHECK(cov.value(v, k) <= 1);
        if (k > 0) CHECK(cov.value(v, k) >= cov.value(v, k - 1));
      }
    }
  }
}

TEST_CASE("cover_table of the co machine both-initial pair") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
  MachineSuite suite = MachineSuite::build(family);
  CoverTable cov(suite.co, t.model, 5);
  int both_init = -1;
  for (int v = 0; v < suite.co.state_count(); ++v) {
    const auto& p = suite.co.payload(v);
    if (p.kind == StatePayload::Kind::CoPair && p.pair_first == suite.simple.initial() &&
        p.pair_second == suite.simple.initial())
      both_init = v;
  }
  REQUIRE(both_init >= 0);
  CHECK(cov.value(both_init, 0) == Rational(0));
  for (int k = 1; k <= 5; ++k) CHECK(cov.value(both_init, k) == Rational(1));
}

TEST_CASE("cover_table rejects non-simple machines") {
  ToyModel t;
  LabeledMachine bad;
  int s0 = bad.add_state(StatePayload::for_episode(0));
  int s1 = bad.add_state(StatePayload::for_episode(1));
  int s2 = bad.add_state(StatePayload::for_episode(2));
  bad.set_initial(s0);
  bad.add_edge(s0, s2, EdgeGuard::single(t.a));
  bad.add_edge(s1, s2, EdgeGuard::single(t.a));  // same incoming label twice
  CHECK_THROWS_AS(CoverTable(bad, t.model, 3), std::invalid_argument);
}

TEST_CASE("minwin_joint reproduces the geometric closed form") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
  MachineSuite suite = MachineSuite::build(family);
  int id = *family.find(Episode::serial({t.a, t.b}));
  int max_len = 12;
  CoverTable cov_s(suite.simple, t.model, max_len);
  CoverTable cov_co(suite.co, t.model, max_len);
  auto joint = minwin_joint(cov_s, cov_co, suite, t.model, id, max_len);

  CHECK(joint[0] == Rational(0));
  for (int k = 2; k <= max_len; ++k)
    CHECK(joint[static_cast<size_t>(k - 1)] ==
          Rational(1, 8) * testutil::rational_pow(Rational(1, 4), k - 2));
}

TEST_CASE("minwin_joint of a singleton") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::single(t.a)});
  MachineSuite suite = MachineSuite::build(family);
  int id = *family.find(Episode::single(t.a));
  CoverTable cov_s(suite.simple, t.model, 5);
  CoverTable cov_co(suite.co, t.model, 5);
  auto joint = minwin_joint(cov_s, cov_co, suite, t.model, id, 5);
  CHECK(joint[0] == Rational(1, 2));
  for (int k = 2; k <= 5; ++k) CHECK(joint[static_cast<size_t>(k - 1)] == 0);
}

TEST_CASE("minwin_joint of the repeated parallel pair") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::parallel({t.a, t.a})});
  MachineSuite suite = MachineSuite::build(family);
  int id = *family.find(Episode::parallel({t.a, t.a}));
  CoverTable cov_s(suite.simple, t.model, 4);
  CoverTable cov_co(suite.co, t.model, 4);
  auto joint = minwin_joint(cov_s, cov_co, suite, t.model, id, 4);
  CHECK(joint[0] == Rational(0));
  CHECK(joint[1] == Rational(1, 4));  // "aa"
  CHECK(joint[2] == Rational(1, 8));  // a, then anything but a, then a
  CHECK(joint[3] == Rational(1, 16));
}

TEST_CASE("both pipelines match the enumeration oracle") {
  ToyModel t;
  std::vector<Episode> episodes = {
      Episode::single(t.a),
      Episode::serial({t.a, t.b}),
      Episode::parallel({t.a, t.b}),
      Episode::parallel({t.a, t.a}),
      Episode::serial({t.a, t.b, t.a}),
      Episode::parallel({t.a, t.b, t.c}),
      Episode({t.a, t.b, t.a}, {{1, 2}}),          // (a, b->a)
      Episode({t.a, t.b, t.c}, {{0, 2}, {1, 2}}),  // join: a and b both before c
      Episode({t.a, t.b, t.c}, {{0, 1}, {0, 2}}),  // fork
  };
  int max_len = 5;
  for (const Episode& g : episodes) {
    EpisodeFamily family = closure({g});
    MachineSuite suite = MachineSuite::build(family);
    int id = *family.find(g);
    CoverTable cov_s(suite.simple, t.model, max_len);
    CoverTable cov_co(suite.co, t.model, max_len);
    auto joint = minwin_joint(cov_s, cov_co, suite, t.model, id, max_len);
    auto direct = minwin_joint_direct(suite, t.model, id, max_len);
    for (int k = 1; k <= max_len; ++k) {
      INFO("episode " << canonical_key(g) << " k=" << k);
      Rational expected = testutil::minwin_probability_oracle(g, t.model, k);
      CHECK(joint[static_cast<size_t>(k - 1)] == expected);
      CHECK(direct[static_cast<size_t>(k - 1)] == expected);
    }
  }
}

TEST_CASE("direct pipeline fixtures") {
  ToyModel t;
  {
    EpisodeFamily family = closure({Episode::single(t.a)});
    MachineSuite suite = MachineSuite::build(family);
    auto direct = minwin_joint_direct(suite, t.model, *family.find(Episode::single(t.a)), 4);
    CHECK(direct[0] == Rational(1, 2));
    CHECK(direct[1] == 0);
  }
  {
    EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
    MachineSuite suite = MachineSuite::build(family);
    auto direct = minwin_joint_direct(suite, t.model, *family.find(Episode::serial({t.a, t.b})), 12);
    for (int k = 2; k <= 12; ++k)
      CHECK(direct[static_cast<size_t>(k - 1)] ==
            Rational(1, 8) * testutil::rational_pow(Rational(1, 4), k - 2));
  }
}

TEST_CASE("normalize scales to an exact distribution") {
  ToyModel t;
  EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
  MachineSuite suite = MachineSuite::build(family);
  int id = *family.find(Episode::serial({t.a, t.b}));
  int max_len = 12;
  CoverTable cov_s(suite.simple, t.model, max_len);
  CoverTable cov_co(suite.co, t.model, max_len);
  WindowDistribution dist = normalize(minwin_joint(cov_s, cov_co, suite, t.model, id, max_len));

  Rational expected_mass = Rational(1, 6) * (Rational(1) - testutil::rational_pow(Rational(1, 4), 11));
  CHECK(dist.mass == expected_mass);

  Rational total = 0;
  for (const Rational& p : dist.normalized) total += p;
  CHECK(total == Rational(1));

  for (int k = 2; k <= max_len; ++k)
    CHECK(dist.normalized[static_cast<size_t>(k - 1)] ==
          Rational(1, 8) * testutil::rational_pow(Rational(1, 4), k - 2) / expected_mass);
}

TEST_CASE("episodes with zero-probability symbols are unreachable") {
  Alphabet alphabet;
  SymbolId a = alphabet.intern("a");
  alphabet.intern("b");
  SymbolId z = alphabet.intern("z");
  SymbolModel model({Rational(1, 2), Rational(1, 2), Rational(0)});
  EpisodeFamily family = closure({Episode::serial({a, z})});
  MachineSuite suite = MachineSuite::build(family);
  int id = *family.find(Episode::serial({a, z}));
  CoverTable cov_s(suite.simple, model, 4);
  CoverTable cov_co(suite.co, model, 4);
  auto joint = minwin_joint(cov_s, cov_co, suite, model, id, 4);
  CHECK(joint_mass(joint) == 0);
  CHECK_THROWS_AS(normalize(std::move(joint)), std::runtime_error);
}

TEST_CASE("moments of the toy chain and of a singleton") {
  ToyModel t;
  {
    EpisodeFamily family = closure({Episode::serial({t.a, t.b})});
    MachineSuite suite = MachineSuite::build(family);
    int id = *family.find(Episode::serial({t.a, t.b}));
    int max_len = 12;
    CoverTable cov_s(suite.simple, t.model, max_len);
    CoverTable cov_co(suite.co, t.model, max_len);
    Moments mo = moments(normalize(minwin_joint(cov_s, cov_co, suite, t.model, id, max_len)));
    CHECK(mo.mean == mo.first / mo.mass);
    // Truncation at 12 leaves the mean within a whisker of 7/3.
    double err = std::fabs(to_double(mo.mean) - 7.0 / 3.0);
    CHECK(err < 1e-3);
    // Untruncated first moment would be 7/18; truncation trims a sliver.
    CHECK(mo.first < Rational(7, 18));
    CHECK(Rational(7, 18) - mo.first < Rational(1, 100000));
  }
  {
    EpisodeFamily family = closure({Episode::single(t.b)});
    MachineSuite suite = MachineSuite::build(family);
    int id = *family.find(Episode::single(t.b));
    CoverTable cov_s(suite.simple, t.model, 4);
    CoverTable cov_co(suite.co, t.model, 4);
    Moments mo = moments(normalize(minwin_joint(cov_s, cov_co, suite, t.model, id, 4)));
    CHECK(mo.mean == Rational(1));
    CHECK(mo.second == Rational(1, 4));  // E[Y^2] = p(b)
    CHECK(mo.mass == Rational(1, 4));
  }
}

TEST_CASE("model file round trip and validation") {
  ToyModel t;
  std::stringstream buf;
  save_model(buf, t.model, t.alphabet);
  Alphabet fresh;
  SymbolModel loaded = load_model(buf, fresh);
  CHECK(loaded.probability(fresh.id_of("a")) == Rational(1, 2));
  CHECK(loaded.probability(fresh.id_of("b")) == Rational(1, 4));
  CHECK(loaded.probability(fresh.id_of("c")) == Rational(1, 4));

  std::stringstream bad("a\t1\t2\nb\t1\t4\n");  // sums to 3/4
  Alphabet other;
  CHECK_THROWS_AS(load_model(bad, other), std::invalid_argument);

  std::stringstream garbled("a 1 2\n");
  Alphabet third;
  CHECK_THROWS_AS(load_model(garbled, third), std::runtime_error);
}
