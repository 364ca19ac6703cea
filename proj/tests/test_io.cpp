#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rib/io.hpp"

using Catch::Approx;
using namespace rib;
using rib::io::json;

TEST_CASE("space JSON round trip") {
  const auto s = io::space_from_json(
      json::parse(R"({"family":"lp","p":2.0,"dim":64})"));
  CHECK(s.is_lp());
  CHECK(s.p() == 2.0);
  CHECK(s.dim() == 64);
  const auto inf = io::space_from_json(
      json::parse(R"({"family":"lp","p":"inf","dim":8})"));
  CHECK(inf.infinite_p());
  CHECK(io::space_to_json(inf).at("p") == "inf");
  const auto lor = io::space_from_json(
      json::parse(R"({"family":"lorentz","weights":[1.0,0.5,0.25],"dim":3})"));
  CHECK(lor.is_lorentz());
  CHECK(lor.dim() == 3);
  const auto again = io::space_from_json(io::space_to_json(lor));
  CHECK(again.weights() == lor.weights());
  CHECK_THROWS_AS(io::space_from_json(json::parse(
                      R"({"family":"lorentz","weights":[1.0,0.5],"dim":3})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      io::space_from_json(json::parse(R"({"family":"orlicz","dim":4})")),
      std::invalid_argument);
  const auto cu = io::space_from_json(
      json::parse(R"({"family":"lp","p":1.0,"dim":4,"cu":2.0,"cs":1.5})"));
  CHECK(cu.cu() == 2.0);
  CHECK(cu.cs() == 1.5);
}

TEST_CASE("matrix CSV parsing") {
  std::istringstream in("1, 2\n3,4\n");
  const auto t = io::matrix_from_csv(in);
  CHECK(t.dim() == 2);
  CHECK(t.entry(0, 1) == 2.0);
  CHECK(t.entry(1, 0) == 3.0);

  std::istringstream bad("1,2\n3,oops\n");
  try {
    io::matrix_from_csv(bad);
    FAIL("expected parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
  }

  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(io::matrix_from_csv(ragged), std::invalid_argument);
}

TEST_CASE("matrix JSON parsing") {
  const auto t = io::matrix_from_json(
      json::parse(R"({"dim":2,"rows":[[1,2],[3,4]]})"));
  CHECK(t.entry(0, 0) == 1.0);
  CHECK(t.entry(1, 1) == 4.0);
  CHECK_THROWS_AS(
      io::matrix_from_json(json::parse(R"({"dim":2,"rows":[[1,2]]})")),
      std::invalid_argument);
}

TEST_CASE("block system JSON uses 1-based indices") {
  const auto sys = io::blocksystem_from_json(json::parse(
      R"({"L":2,"blocks":[[1,2],[3,4]],"signs":[[1,-1],[1,-1]]})"));
  CHECK(sys.blocks[0] == std::vector<int>{0, 1});
  CHECK(sys.blocks[1] == std::vector<int>{2, 3});
  sys.validate(4);
  const auto j = io::blocksystem_to_json(sys);
  CHECK(j.at("blocks")[0][0] == 1);
  CHECK(j.at("signs")[0][0] == 1);
}

TEST_CASE("certificate JSON carries the contract fields") {
  SelectionCertificate cert;
  cert.sigma = {0, 2};
  cert.offdiag_norm = 0.1;
  cert.inverse_norm = 1.2;
  cert.neumann_bound = 1.4;
  cert.guarantee_size = 1.1;
  cert.window_satisfied = false;
  cert.trials_used = 3;
  cert.seed = 42;
  const auto j = io::to_json(cert);
  CHECK(j.at("sigma") == json::array({1, 3}));
  for (const char* key :
       {"offdiag_norm", "inverse_norm", "neumann_bound", "guarantee_size",
        "window_satisfied", "trials_used", "seed"})
    CHECK(j.contains(key));
}

TEST_CASE("full-precision formatting survives a round trip") {
  for (double v : {1.0 / 3.0, 2.0e-17, 123456.789, 0.1}) {
    const std::string s = io::format_full(v);
    CHECK(std::stod(s) == v);
  }
}
