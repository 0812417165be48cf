#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "streamfilter/config.hpp"
#include "streamfilter/ensemble.hpp"
#include "streamfilter/format.hpp"
#include "streamfilter/rng.hpp"
#include "streamfilter/ssm_model.hpp"
#include "streamfilter/table.hpp"

using namespace streamfilter;

TEST_CASE("rng streams are pure functions of their key path") {
  auto a = Rng::stream(42, {3, 5, 7});
  auto b = Rng::stream(42, {3, 5, 7});
  auto c = Rng::stream(42, {3, 5, 8});
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs |= x != c();
  }
  CHECK(differs);
  CHECK(derive_key(1, 2) != derive_key(2, 1));
}

TEST_CASE("rng marginal moments") {
  auto rng = Rng::stream(7, {1});
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sg = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sg += rng.gamma(2.5, 0.4);
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sg / n == doctest::Approx(1.0).epsilon(0.02));  // shape * scale

  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("real formatting round-trips exactly") {
  auto rng = Rng::stream(3, {});
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, static_cast<double>(rng.index(40)) - 20.0);
    CHECK(*parse_real(format_real(x)) == x);
  }
  CHECK(*parse_real(format_real(0.1)) == 0.1);
  CHECK(!parse_real("1.5x"));
  CHECK(!parse_int("3.0"));
  CHECK(*parse_int(" -12 ") == -12);
}

TEST_CASE("config parsing") {
  std::istringstream in("# comment\nn_values = 1, 5\nsigma2 = 0.5  # trailing\nname = Seal Rocks\nflag = true\n");
  const auto cfg = ConfigFile::parse(in);
  CHECK(*cfg.integers("n_values") == std::vector<std::int64_t>{1, 5});
  CHECK(*cfg.real("sigma2") == 0.5);
  CHECK(*cfg.text("name") == "Seal Rocks");
  CHECK(*cfg.boolean("flag"));
  CHECK(!cfg.real("missing"));
  CHECK_THROWS_AS(cfg.real("name"), ConfigError);
  CHECK_THROWS_AS(cfg.reject_unknown({"n_values", "sigma2"}), ConfigError);
  CHECK_NOTHROW(cfg.reject_unknown({"n_values", "sigma2", "name", "flag"}));

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_AS(ConfigFile::parse(dup), ParseError);
  std::istringstream bad("a = 1\njust text\n");
  try {
    ConfigFile::parse(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("table layout") {
  Table t("demo", {"a", "b"});
  t.note("seed", "9");
  t.add_row({cell(1), cell(0.25)});
  t.add_row({"x", cell(true)});
  CHECK_THROWS_AS(t.add_row({"only one"}), ContractViolation);
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "# seed=9\na,b\n1,0.25\nx,1\n");
  CHECK(t.column("b") == std::vector<std::string>{"0.25", "1"});
}

TEST_CASE("dataset text round trip is bit exact") {
  const auto ds = ssm::generate_data(12, 4, {0.5, 1.0}, 99);
  std::stringstream io;
  ssm::write_dataset(io, ds);
  const auto back = ssm::read_dataset(io);
  REQUIRE(back.horizon() == ds.horizon());
  CHECK(back.seed == ds.seed);
  CHECK(back.hyper.sigma2 == ds.hyper.sigma2);
  CHECK(back.hyper.phi2 == ds.hyper.phi2);
  for (int t = 0; t < ds.horizon(); ++t) {
    CHECK(back.batches[static_cast<std::size_t>(t)].values == ds.batches[static_cast<std::size_t>(t)].values);
    CHECK(back.true_states[static_cast<std::size_t>(t)] == ds.true_states[static_cast<std::size_t>(t)]);
  }
}

TEST_CASE("ensemble text round trip is bit exact") {
  auto rng = Rng::stream(5, {});
  Matrix m(3, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal() * 1e-3;
  const Ensemble e(7, m);
  std::stringstream io;
  write_ensemble(io, e, {"ssm", "master=1/dataset=0/run=2"});
  EnsembleHeader h;
  const auto back = read_ensemble(io, &h);
  CHECK(back.time() == 7);
  CHECK(back.members() == m);
  CHECK(h.model == "ssm");
  CHECK(h.lineage == "master=1/dataset=0/run=2");

  std::istringstream bad("# t=1\n# S=2\n# dim=1\ns,j,value\n1,1,0.5\n");
  CHECK_THROWS(read_ensemble(bad));
  CHECK_THROWS_AS(Ensemble(1, Matrix::Zero(2, 1)), ContractViolation);
}
