#include <doctest.h>

#include <cmath>
#include <random>

#include "exactbp/factor.hpp"
#include "support/fixtures.hpp"

using namespace exactbp;
using namespace exactbp::testing;

namespace {

Factor random_factor(std::mt19937_64& gen, std::vector<VarId> scope, const std::vector<std::size_t>& all_cards,
                     double zero_probability = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> cards;
  std::size_t n = 1;
  for (VarId u : scope) {
    cards.push_back(all_cards[u]);
    n *= all_cards[u];
  }
  std::vector<double> values(n);
  for (double& v : values) v = unit(gen) < zero_probability ? 0.0 : 0.1 + unit(gen);
  return Factor(std::move(scope), std::move(cards), std::move(values), unit(gen) * 4.0 - 2.0);
}

std::vector<VarId> random_scope(std::mt19937_64& gen, std::size_t nvars) {
  std::vector<VarId> scope;
  for (VarId u = 0; u < nvars; ++u)
    if (gen() % 2) scope.push_back(u);
  return scope;
}

void check_same(const Factor& a, const Factor& b, double rel = 1e-12) {
  REQUIRE(a.scope() == b.scope());
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a.linear(k), y = b.linear(k);
    CHECK(std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y)));
  }
}

void check_well_formed(const Factor& f) {
  for (double v : f.values()) CHECK((std::isfinite(v) && v >= 0.0));
  CHECK(std::isfinite(f.log_scale()));
}

const std::vector<std::size_t> kCards{2, 3, 2, 3, 2};

}  // namespace

TEST_CASE("construction checks its invariants") {
  CHECK_THROWS_AS(Factor({1, 0}, {2, 2}, {1, 1, 1, 1}), ScopeMismatchError);
  CHECK_THROWS_AS(Factor({0, 0}, {2, 2}, {1, 1, 1, 1}), ScopeMismatchError);
  CHECK_THROWS_AS(Factor({0}, {2}, {1, 1, 1}), ScopeMismatchError);
  CHECK_THROWS_AS(Factor({0}, {2}, {1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(Factor({0}, {2}, {1, NAN}), std::invalid_argument);
  const Factor f({0, 3}, {2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(f.index(std::vector<std::size_t>{1, 2}) == 5);
  CHECK(f.states_of(4) == std::vector<std::size_t>{1, 1});
  CHECK(f.index_from({1, 9, 9, 0}) == 3);
  CHECK(Factor().size() == 1);
  CHECK(Factor().linear(0) == 1.0);
}

TEST_CASE("multiply") {
  SUBCASE("by ones") {
    const Factor f({0}, {2}, {2, 3});
    const Factor g = multiply(f, Factor({0}, {2}, {1, 1}));
    CHECK(g.linear_values() == std::vector<double>{2, 3});
  }
  SUBCASE("outer product") {
    const Factor g = multiply(Factor({0}, {2}, {0.5, 0.5}), Factor({1}, {2}, {0.2, 0.8}));
    CHECK(g.scope() == std::vector<VarId>{0, 1});
    const std::vector<double> expected{0.1, 0.4, 0.1, 0.4};
    for (std::size_t k = 0; k < 4; ++k) CHECK(g.linear(k) == doctest::Approx(expected[k]).epsilon(1e-15));
  }
  SUBCASE("founder prior under evidence times ones") {
    const auto& p = pedigree();
    const Factor k2 = restrict(cpd_factor(p.net, p.x(2)), p.evidence);
    const Factor g = multiply(k2, Factor::ones({p.x(2)}, {3}));
    CHECK(g.linear_values() == std::vector<double>{0, 0, 0.04});
  }
  SUBCASE("log scales add") {
    const Factor g = multiply(Factor({0}, {2}, {1, 2}, 1.5), Factor::constant(3.0, -0.5));
    CHECK(g.log_scale() == doctest::Approx(1.0));
    CHECK(g.linear(1) == doctest::Approx(6.0 * std::exp(1.0)));
  }
  SUBCASE("scope cap") {
    std::vector<VarId> a, b;
    for (VarId u = 0; u < 4; ++u) a.push_back(u);
    for (VarId u = 4; u < 7; ++u) b.push_back(u);
    const Factor f = Factor::ones(a, std::vector<std::size_t>(4, 1));
    const Factor g = Factor::ones(b, std::vector<std::size_t>(3, 1));
    CHECK_THROWS_AS(multiply(f, g, 6), ScopeOverflowError);
    CHECK_NOTHROW(multiply(f, g, 7));
  }
  SUBCASE("cardinality clash") {
    CHECK_THROWS_AS(multiply(Factor::ones({0}, {2}), Factor::ones({0}, {3})), ScopeMismatchError);
  }
}

TEST_CASE("marginalize") {
  const Factor f({0, 1}, {2, 2}, {0.1, 0.4, 0.1, 0.4});
  const std::vector<VarId> b{1};
  const Factor s = marginalize_sum(f, b);
  CHECK(s.linear(0) == doctest::Approx(0.5));
  CHECK(s.linear(1) == doctest::Approx(0.5));
  const Factor m = marginalize_max(f, b);
  CHECK(m.linear_values() == std::vector<double>{0.4, 0.4});
  CHECK(marginalize_max(Factor::constant(7.0), {}).linear(0) == 7.0);
  const std::vector<VarId> missing{3};
  CHECK_THROWS_AS(marginalize_sum(f, missing), ScopeMismatchError);

  const auto& p = pedigree();
  SUBCASE("Mendelian CPD sums to ones over the parents") {
    const Factor k = cpd_factor(p.net, p.x(3));
    const std::vector<VarId> child{p.x(3)};
    const Factor ones = marginalize_sum(k, child);
    CHECK(ones.scope() == std::vector<VarId>{p.x(1), p.x(2)});
    for (double v : ones.linear_values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    const Factor top = marginalize_max(k, child);
    CHECK(top.value(std::vector<std::size_t>{dD, dD}) == 0.5);
  }
  SUBCASE("sum over X8 of K8 is the message 7 -> 6") {
    const Factor k8 = restrict(cpd_factor(p.net, p.x(8)), p.evidence);
    const std::vector<VarId> x8{p.x(8)};
    const Factor m = marginalize_sum(k8, x8);
    const std::vector<double> expected{0, 0, 0, 0, 0.25, 0.5, 0, 0.5, 1};
    for (std::size_t k = 0; k < 9; ++k) CHECK(m.linear(k) == doctest::Approx(expected[k]).epsilon(1e-15));
  }
}

TEST_CASE("restrict") {
  const auto& p = pedigree();
  const Factor prior = cpd_factor(p.net, p.x(1));
  EvidenceSet ev;
  ev.allow(p.x(1), {dd, dD});
  CHECK(restrict(prior, ev).linear_values() == std::vector<double>{0.64, 0.32, 0});
  CHECK(restrict(prior, EvidenceSet{}).linear_values() == prior.linear_values());
  EvidenceSet none;
  none.allow(p.x(1), {});
  CHECK(restrict(prior, none).linear_values() == std::vector<double>{0, 0, 0});
}

TEST_CASE("divide") {
  const Factor q = divide(Factor({0}, {2}, {0.2, 0.0}), Factor({0}, {2}, {0.4, 0.0}));
  CHECK(q.linear(0) == doctest::Approx(0.5));
  CHECK(q.linear(1) == 0.0);
  const Factor f({0, 1}, {2, 3}, {1, 2, 3, 4, 5, 6}, 0.25);
  for (double v : divide(f, f).linear_values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(divide(Factor({0}, {2}, {1, 1}), Factor({0}, {2}, {1, 0})), DivisionInconsistencyError);
  CHECK_THROWS_AS(divide(Factor::ones({0}, {2}), Factor::ones({1}, {2})), ScopeMismatchError);

  const auto& p = pedigree();
  const Factor k8 = restrict(cpd_factor(p.net, p.x(8)), p.evidence);
  const std::vector<VarId> x8{p.x(8)};
  const Factor conditional = divide(k8, marginalize_sum(k8, x8));
  CHECK(conditional.value(std::vector<std::size_t>{dD, dD, DD}) == doctest::Approx(1.0));
}

TEST_CASE("normalize") {
  const auto n = normalize(Factor({0}, {2}, {2, 2}));
  CHECK(n.factor.linear_values() == std::vector<double>{0.5, 0.5});
  CHECK(n.log_norm == doctest::Approx(std::log(4.0)));
  CHECK(n.factor.log_scale() == 0.0);
  const auto one = normalize(Factor::constant(1.0));
  CHECK(one.factor.linear(0) == 1.0);
  CHECK(one.log_norm == 0.0);
  CHECK(normalize(Factor({0}, {2}, {1, 3}, 2.0)).log_norm == doctest::Approx(std::log(4.0) + 2.0));
  CHECK_THROWS_AS(normalize(Factor({0}, {2}, {0, 0})), ZeroMassError);
}

TEST_CASE("rescaling keeps the represented values") {
  const Factor f({0}, {3}, {1e-300, 4e-300, 0}, 3.0);
  const Factor r = f.rescaled();
  CHECK(r.values()[1] == 1.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(r.linear(k) == doctest::Approx(f.linear(k)).epsilon(1e-14));
  CHECK(f.log_mass() == doctest::Approx(std::log(5e-300) + 3.0));
  const Factor zero({0}, {2}, {0, 0});
  CHECK(zero.rescaled().values() == zero.values());
  CHECK(zero.log_mass() == -INFINITY);
}

TEST_CASE("slice fixes variables") {
  const Factor f({0, 1, 2}, {2, 3, 2}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  const std::vector<VarId> vars{1};
  const std::vector<std::size_t> states{2};
  const Factor s = slice(f, vars, states);
  CHECK(s.scope() == std::vector<VarId>{0, 2});
  CHECK(s.linear_values() == std::vector<double>{4, 5, 10, 11});
}

TEST_CASE("algebraic properties on random factors") {
  std::mt19937_64 gen(2024);
  for (int t = 0; t < 200; ++t) {
    const Factor f = random_factor(gen, random_scope(gen, 5), kCards, 0.2);
    const Factor g = random_factor(gen, random_scope(gen, 5), kCards, 0.2);
    const Factor h = random_factor(gen, random_scope(gen, 5), kCards, 0.2);

    check_same(multiply(f, g), multiply(g, f));
    check_same(multiply(multiply(f, g), h), multiply(f, multiply(g, h)));
    check_well_formed(multiply(f, g));

    // distributivity when the scopes are disjoint
    std::vector<VarId> left, right;
    for (VarId u = 0; u < 5; ++u) (u < 2 ? left : right).push_back(u);
    const Factor a = random_factor(gen, left, kCards);
    const Factor b = random_factor(gen, right, kCards);
    check_same(marginalize_sum(multiply(a, b), right), multiply(a, Factor::constant(std::exp(b.log_mass()))));

    EvidenceSet ev = random_evidence(gen, pedigree().net, 0.0);
    ev.allow(gen() % 5, {0});
    const Factor once = restrict(f, ev);
    const Factor twice = restrict(once, ev);
    CHECK(once.values() == twice.values());
    CHECK(once.log_scale() == twice.log_scale());

    // divide undoes multiply wherever g > 0
    std::vector<VarId> sub;
    for (VarId u : f.scope())
      if (gen() % 2) sub.push_back(u);
    const Factor positive = random_factor(gen, sub, kCards);
    check_same(divide(multiply(f, positive), positive), f);
    check_well_formed(divide(multiply(f, positive), positive));
    check_well_formed(marginalize_max(f, sub));
  }
}

TEST_CASE("cpd factor uses the sorted family layout") {
  DiscreteNetwork net({{"A", {"0", "1"}}, {"B", {"0", "1", "2"}}, {"C", {"0", "1"}}},
                      {{0, {}, {{0.5, 0.5}}},
                       {1, {}, {{0.2, 0.3, 0.5}}},
                       {2, {1, 0}, {{1, 0}, {0.9, 0.1}, {0.8, 0.2}, {0.7, 0.3}, {0.6, 0.4}, {0.5, 0.5}}}});
  const Factor k = cpd_factor(net, 2);
  CHECK(k.scope() == std::vector<VarId>{0, 1, 2});
  // A=1, B=2 is listed-parent row 2*2+1 = 5
  CHECK(k.value(std::vector<std::size_t>{1, 2, 1}) == 0.5);
  // A=1, B=0 is row 1
  CHECK(k.value(std::vector<std::size_t>{1, 0, 1}) == 0.1);
}
