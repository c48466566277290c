#include <doctest.h>

#include "fracspace/linalg.hpp"
#include "fracspace/report.hpp"

using namespace fracspace;

TEST_CASE("gram_schmidt orthonormalizes in a weighted inner product") {
  Rng rng(7);
  Matrix a(30, 12);
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = rng.uniform_vector(30);
  Matrix b(30, 30);
  for (Eigen::Index j = 0; j < 30; ++j) b.col(j) = rng.uniform_vector(30);
  const Matrix g = b * b.transpose() + 30.0 * Matrix::Identity(30, 30);

  const Matrix q = gram_schmidt(a, g);
  CHECK(orthonormality_defect(q, g) < 1e-13);
  // span is preserved: q = a R with R upper triangular
  const Matrix r = a.colPivHouseholderQr().solve(q);
  CHECK((a * r - q).norm() < 1e-10);
  CHECK(r.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() < 1e-10);

  CHECK(orthonormality_defect(gram_schmidt(a)) < 1e-13);
}

TEST_CASE("positive definiteness and asymmetry") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(is_positive_definite(m));
  m << 1, 2, 2, 1;
  CHECK_FALSE(is_positive_definite(m));
  m << 1, 2, 3, 1;
  CHECK(asymmetry(m) == doctest::Approx(1.0));
}

TEST_CASE("Rng is seeded and reproducible") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform(-1.0, 1.0);
    CHECK(x == b.uniform(-1.0, 1.0));
    CHECK(x >= -1.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
}

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.141592653589793}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("report summary, csv layout and json") {
  VerificationReport r;
  r.experiment = "demo";
  r.add_cell({{"theta", 0.5}, {"ratio", 1.01}}, 0.1, true);
  r.add_cell({{"ratio", 0.95}, {"label", "x,y"}}, 0.1, false);
  r.add_cell({{"flag", true}}, 0.0, true);

  const Summary s = r.summary();
  CHECK(s.cell_count == 3);
  CHECK(s.pass_count == 2);
  REQUIRE(s.worst_ratio);
  CHECK(*s.worst_ratio == 0.95);
  CHECK_FALSE(r.all_pass());

  const std::string csv = r.to_csv();
  const std::string header = csv.substr(0, csv.find("\r\n"));
  CHECK(header == "experiment,cell,flag,label,ratio,theta,tolerance,pass");
  CHECK(csv.find("demo,1,,\"x,y\",0.94999999999999996,,0.10000000000000001,false\r\n") != std::string::npos);
  CHECK(csv.find("demo,2,true,,,,0,true\r\n") != std::string::npos);

  const json j = r.to_json();
  CHECK(j["experiment"] == "demo");
  CHECK(j["cells"].size() == 3);
  CHECK(j["summary"]["pass_count"] == 2);

  VerificationReport other;
  other.add_cell({{"ratio", 1.0}}, 0.0, true);
  r.merge(other);
  CHECK(r.cells.size() == 4);
}
