#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hpdgeo;
using namespace testsupport;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / ("hpdgeo_cli_" + std::to_string(++counter));
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / "hpdgeo_cli_streams";
  fs::create_directories(dir);
  const std::string out_path = (dir / ("out" + std::to_string(++counter))).string();
  const std::string err_path = (dir / ("err" + std::to_string(counter))).string();
  const std::string command = std::string("\"") + HPDGEO_CLI_PATH + "\" " + args + " > " +
                              out_path + " 2> " + err_path;
  const int status = std::system(command.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(out_path)) result.out = read_text_file(out_path);
  if (fs::exists(err_path)) result.err = read_text_file(err_path);
  return result;
}

std::string write_matrix(const fs::path& dir, const std::string& name, const CMat& a) {
  const std::string path = (dir / name).string();
  write_matrix_file(path, a);
  return path;
}

}  // namespace

TEST_CASE("distance, geodesic, and midpoint subcommands") {
  const auto dir = work_dir();
  const CMat a = matrix2(5.0, Complex(1, 2), Complex(1, -2), 5.0);
  const CMat b = matrix2(4.0, Complex(1, -1), Complex(1, 1), 4.0);
  const std::string pa = write_matrix(dir, "a.json", a);
  const std::string pb = write_matrix(dir, "b.json", b);

  SECTION("distance prints a 12-digit decimal") {
    const CliResult r = run_cli("distance " + pa + " " + pb);
    CHECK(r.code == 0);
    const double expected = distance(HpdMatrix(a), HpdMatrix(b));
    CHECK(r.out == format_g12(expected) + "\n");
  }

  SECTION("geodesic at one half equals the midpoint output") {
    const CliResult g = run_cli("geodesic " + pa + " " + pb + " --t 0.5");
    const CliResult m = run_cli("midpoint " + pa + " " + pb);
    CHECK(g.code == 0);
    CHECK(m.code == 0);
    CHECK(g.out == m.out);
    CHECK(g.err.empty());
    const CMat parsed = parse_matrix_text(g.out, "cli");
    CHECK(max_abs_diff(parsed, midpoint(HpdMatrix(a), HpdMatrix(b)).mat()) < 1e-10);
  }

  SECTION("out-of-range curve parameter warns but still evaluates") {
    const CliResult r = run_cli("geodesic " + pa + " " + pb + " --t 1.5");
    CHECK(r.code == 0);
    CHECK_THAT(r.err, ContainsSubstring("warning"));
    CHECK_THAT(r.err, ContainsSubstring("1.5"));
    CHECK_FALSE(r.out.empty());
  }

  SECTION("--out writes the same bytes that stdout shows") {
    const std::string out_file = (dir / "mid.json").string();
    const CliResult r = run_cli("midpoint " + pa + " " + pb + " --out " + out_file);
    CHECK(r.code == 0);
    CHECK(read_text_file(out_file) == r.out);
  }

  SECTION("--quiet suppresses stdout") {
    const CliResult r = run_cli("--quiet distance " + pa + " " + pb);
    CHECK(r.code == 0);
    CHECK(r.out.empty());
  }
}

TEST_CASE("control subcommand") {
  const auto dir = work_dir();
  const std::string target32 = write_matrix(dir, "target32.json", steering_demo_target_2().mat());
  const std::string diag = write_matrix(dir, "diag.json", matrix2(9.0, 0.0, 0.0, 4.0));

  SECTION("natural controller converges and writes a trajectory") {
    const std::string traj = (dir / "traj.csv").string();
    const CliResult r = run_cli("control --algo natural --system m2 --target " + target32 +
                                " --u0 1,4 --out " + traj);
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("tolerance_met"));
    CHECK_THAT(r.out, ContainsSubstring("44.72"));
    const std::string csv = read_text_file(traj);
    CHECK(csv.rfind("k,u_1,u_2,J,grad_norm,dist_to_target\n", 0) == 0);
  }

  SECTION("riemannian controller accepts on-manifold targets only") {
    const CliResult ok = run_cli("control --algo riemannian --system m2 --target " + diag +
                                 " --u0 1,4 --eps 1e-9");
    CHECK(ok.code == 0);
    const CliResult off = run_cli("control --algo riemannian --system m2 --target " +
                                  target32 + " --u0 1,4");
    CHECK(off.code == 3);
    CHECK_THAT(off.err, ContainsSubstring("natural"));
  }

  SECTION("iteration cap yields the tolerance-not-met exit code") {
    const CliResult r = run_cli("control --algo natural --demo example-3.1 --max-iter 2");
    CHECK(r.code == 2);
    CHECK_THAT(r.out, ContainsSubstring("max_iterations"));
  }

  SECTION("demo presets run both controllers and write a report") {
    const std::string out = (work_dir() / "demo31").string();
    fs::create_directories(out);
    const CliResult r = run_cli("control --demo example-3.1 --out " + out);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(out) / "example-3.1-riemannian.csv"));
    CHECK(fs::exists(fs::path(out) / "example-3.1-natural.csv"));
    CHECK(fs::exists(fs::path(out) / "example-3.1-report.json"));
    CHECK_THAT(r.out, ContainsSubstring("wall"));
  }

  SECTION("missing required pieces are input errors") {
    CHECK(run_cli("control --algo natural --system m2 --u0 1,4").code == 3);
    CHECK(run_cli("control --algo sideways --system m2 --target " + diag + " --u0 1,4").code ==
          3);
    CHECK(run_cli("control --algo natural --system m9 --target " + diag + " --u0 1,4").code ==
          3);
    CHECK(run_cli("control --algo natural --system m2 --target " + diag + " --u0 1,4,9")
              .code == 3);
    CHECK(run_cli("control --algo natural --system m2 --target " + diag +
                  " --u0 1,oops")
              .code == 3);
  }
}

TEST_CASE("karcher and triangle subcommands") {
  const auto dir = work_dir();
  const std::vector<HpdMatrix> demo = mean_demo_inputs_1();
  const std::string p1 = write_matrix(dir, "r1.json", demo[0].mat());
  const std::string p2 = write_matrix(dir, "r2.json", demo[1].mat());
  const std::vector<HpdMatrix> three = mean_demo_inputs_2();
  const std::string q1 = write_matrix(dir, "s1.json", three[0].mat());
  const std::string q2 = write_matrix(dir, "s2.json", three[1].mat());
  const std::string q3 = write_matrix(dir, "s3.json", three[2].mat());

  SECTION("two-input mean from files matches the midpoint") {
    const CliResult r = run_cli("karcher --algo riemannian --inputs " + p1 + "," + p2 +
                                " --eps 1e-10");
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("tolerance_met"));
    const std::size_t pos = r.out.find("mean = ");
    REQUIRE(pos != std::string::npos);
    std::string json = r.out.substr(pos + 7);
    json = json.substr(0, json.find('\n'));
    const CMat mean = parse_matrix_text(json, "cli");
    CHECK(max_abs_diff(mean, midpoint(demo[0], demo[1]).mat()) < 1e-7);
  }

  SECTION("natural mean requires Toeplitz inputs") {
    const std::string bad = write_matrix(dir, "bad.json", matrix2(1.0, 0.0, 0.0, 2.0));
    const CliResult r = run_cli("karcher --algo natural --inputs " + p1 + "," + bad);
    CHECK(r.code == 3);
    CHECK_THAT(r.err, ContainsSubstring("Toeplitz"));
  }

  SECTION("demo presets write both trajectories") {
    const std::string out = (work_dir() / "demo42").string();
    fs::create_directories(out);
    const CliResult r = run_cli("karcher --demo example-4.2 --out " + out);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(out) / "example-4.2-riemannian.csv"));
    CHECK(fs::exists(fs::path(out) / "example-4.2-natural.csv"));
    CHECK(fs::exists(fs::path(out) / "example-4.2-report.json"));
  }

  SECTION("capped mean run exits with the tolerance code") {
    const CliResult r = run_cli("karcher --algo riemannian --demo example-4.2 --max-iter 3");
    CHECK(r.code == 2);
  }

  SECTION("triangle reports median separations and writes curves") {
    const std::string curves = (dir / "curves.csv").string();
    const CliResult r = run_cli("triangle --inputs " + q1 + "," + q2 + "," + q3 +
                                " --samples 17 --out " + curves);
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("median_1"));
    const std::string csv = read_text_file(curves);
    CHECK(csv.rfind("curve,t,", 0) == 0);
    // Header plus six curves sampled 17 times each.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6 * 17);

    CHECK(run_cli("triangle --inputs " + q1 + "," + q2).code == 3);
    CHECK(run_cli("triangle --inputs " + q1 + "," + q1 + "," + q2).code == 3);
  }
}

TEST_CASE("demo subcommand and determinism") {
  SECTION("full demo runs exit cleanly") {
    const std::string out = (work_dir() / "full").string();
    fs::create_directories(out);
    const CliResult r = run_cli("demo example-4.1 --out " + out);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(out) / "example-4.1-report.json"));
    CHECK(run_cli("demo example-0.0").code == 3);
  }

  SECTION("identical configurations produce byte-identical artifacts") {
    const std::string out1 = (work_dir() / "first").string();
    const std::string out2 = (work_dir() / "second").string();
    fs::create_directories(out1);
    fs::create_directories(out2);
    CHECK(run_cli("demo example-3.1 --out " + out1).code == 0);
    CHECK(run_cli("demo example-3.1 --out " + out2).code == 0);
    for (const char* name :
         {"example-3.1-riemannian.csv", "example-3.1-natural.csv", "example-3.1-report.json"}) {
      const std::string f1 = read_text_file((fs::path(out1) / name).string());
      const std::string f2 = read_text_file((fs::path(out2) / name).string());
      CHECK(f1 == f2);
      CHECK_FALSE(f1.empty());
    }

    // The seed flag is accepted and has no effect on deterministic runs.
    const std::string out3 = (work_dir() / "third").string();
    fs::create_directories(out3);
    CHECK(run_cli("demo example-3.1 --seed 42 --out " + out3).code == 0);
    const std::string f3 =
        read_text_file((fs::path(out3) / "example-3.1-riemannian.csv").string());
    const std::string f1 =
        read_text_file((fs::path(out1) / "example-3.1-riemannian.csv").string());
    CHECK(f3 == f1);
  }
}

TEST_CASE("input and numerical failures map to distinct exit codes") {
  const auto dir = work_dir();

  SECTION("parse failures") {
    const std::string garbage = (dir / "garbage.json").string();
    write_text_file(garbage, "{broken");
    const std::string other = write_matrix(dir, "ok.json", matrix2(2.0, 0.0, 0.0, 2.0));
    const CliResult r = run_cli("distance " + garbage + " " + other);
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
    CHECK(run_cli("distance " + (dir / "missing.json").string() + " " + other).code == 3);
  }

  SECTION("validation failures") {
    const std::string nonherm = (dir / "nonherm.json").string();
    write_text_file(nonherm, "{\"n\":2,\"entries\":[[[1,0],[2,0]],[[3,0],[1,0]]]}");
    const std::string indefinite = (dir / "indefinite.json").string();
    write_text_file(indefinite, "{\"n\":2,\"entries\":[[[1,0],[0,0]],[[0,0],[-3,0]]]}");
    const std::string ok = write_matrix(dir, "ok.json", matrix2(2.0, 0.0, 0.0, 2.0));
    CHECK(run_cli("distance " + nonherm + " " + ok).code == 3);
    CHECK(run_cli("distance " + indefinite + " " + ok).code == 3);
  }

  SECTION("unknown flags and subcommands") {
    CHECK(run_cli("frobslice a b").code == 3);
    CHECK(run_cli("distance --frob a b").code == 3);
    const CliResult help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK_THAT(help.out, ContainsSubstring("distance"));
  }

  SECTION("ill-conditioned pullback metric is a numerical failure") {
    const std::string spec = (dir / "skewed.json").string();
    write_text_file(spec, R"({
      "m": 2, "n": 2,
      "c0": {"n":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]},
      "basis": [
        {"n":2,"entries":[[[1,0],[0,0]],[[0,0],[0,0]]]},
        {"n":2,"entries":[[[0,0],[0,0]],[[0,0],[1e-7,0]]]}
      ]
    })");
    const std::string target = write_matrix(dir, "target.json", matrix2(3.0, 0.0, 0.0, 1.5));
    const CliResult r = run_cli("control --algo natural --system file:" + spec +
                                " --target " + target + " --u0 1,1");
    CHECK(r.code == 4);
    CHECK_THAT(r.out, ContainsSubstring("metric_singular"));
  }
}
