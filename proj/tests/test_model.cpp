#include <filesystem>
#include <fstream>

#include "frsid/model.hpp"
#include "test_common.hpp"

using namespace frsid;
using frsid::test::random_matrix;
using frsid::test::rel_err;

namespace {

StateSpaceModel make_model(Index n, Index m, Index p, std::uint64_t seed) {
  StateSpaceModel model;
  model.a = 0.5 * random_matrix(n, n, seed) / std::sqrt(double(n));
  model.b = random_matrix(n, m, seed + 1);
  model.c = random_matrix(p, n, seed + 2);
  model.d = random_matrix(p, m, seed + 3);
  model.k = random_matrix(n, p, seed + 4);
  model.eta = Matrix::Identity(p, p);
  return model;
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "frsid_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("model dimensions and validation", "[model]") {
  StateSpaceModel model = make_model(3, 2, 1, 4000);
  CHECK(model.n() == 3);
  CHECK(model.m() == 2);
  CHECK(model.p() == 1);
  CHECK_NOTHROW(model.validate());
  model.b = Matrix::Zero(2, 2);  // wrong state count
  CHECK_THROWS_AS(model.validate(), DimensionError);
}

TEST_CASE("model JSON round-trip", "[model]") {
  const StateSpaceModel model = make_model(4, 2, 3, 4100);
  const std::string path = scratch("model.json");
  save_model(model, path);
  const StateSpaceModel back = load_model(path);
  CHECK(rel_err(back.a, model.a) <= 1e-15);
  CHECK(rel_err(back.b, model.b) <= 1e-15);
  CHECK(rel_err(back.c, model.c) <= 1e-15);
  CHECK(rel_err(back.d, model.d) <= 1e-15);
  CHECK(rel_err(back.k, model.k) <= 1e-15);
  CHECK(rel_err(back.eta, model.eta) <= 1e-15);
}

TEST_CASE("model JSON carries the format version", "[model]") {
  const StateSpaceModel model = make_model(1, 1, 1, 4200);
  const std::string path = scratch("versioned.json");
  save_model(model, path);
  std::ifstream in(path);
  const std::string body((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  CHECK(body.find("frsid-model-1") != std::string::npos);
}

TEST_CASE("model JSON parse errors", "[model]") {
  const std::string path = scratch("broken.json");
  std::ofstream(path) << "{\"format\": \"frsid-model-1\", \"n\": 2}";
  CHECK_THROWS_AS(load_model(path), ParseError);
  std::ofstream(path, std::ios::trunc) << "not json";
  CHECK_THROWS_AS(load_model(path), ParseError);
}

TEST_CASE("markov parameters start at D and follow C A^j B", "[model]") {
  const StateSpaceModel model = make_model(3, 2, 2, 4300);
  const auto g = markov_parameters(model, 4);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == model.d);
  CHECK(rel_err(g[1], model.c * model.b) <= 1e-14);
  CHECK(rel_err(g[3], model.c * model.a * model.a * model.b) <= 1e-14);
}

TEST_CASE("poles are the eigenvalues of A", "[model]") {
  StateSpaceModel model = make_model(2, 1, 1, 4400);
  model.a << 0.5, 0.0, 0.0, -0.25;
  const ComplexVector poles = model.poles();
  std::vector<double> values = {poles(0).real(), poles(1).real()};
  std::sort(values.begin(), values.end());
  CHECK(std::abs(values[0] + 0.25) <= 1e-14);
  CHECK(std::abs(values[1] - 0.5) <= 1e-14);
}
