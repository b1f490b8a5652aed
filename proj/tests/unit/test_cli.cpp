#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace {
struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string("\"") + DSQ_CLI_PATH + "\" " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) o.out += buf.data();
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dsq_cli_test_" + name)).string();
}
}  // namespace

TEST_CASE("cli: listing and help") {
  const auto l = run("list-experiments");
  CHECK(l.code == 0);
  CHECK(l.out.find("timoney_mode") != std::string::npos);
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("launch").code == 1);
}

TEST_CASE("cli: run writes CSV and JSON") {
  const std::string prefix = tmp("rabi");
  const auto r = run("run rabi_bare --set shots=20 --set points=11 -o " + prefix);
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(prefix + ".csv"));
  CHECK(std::filesystem::exists(prefix + ".json"));
  const auto again = run("run rabi_bare --config " + prefix + ".json -o " + prefix + "2");
  CHECK(again.code == 0);
}

TEST_CASE("cli: exit codes") {
  CHECK(run("run rabi_bare --set shots=-3").code == 1);
  CHECK(run("run no_such_experiment").code == 1);
  CHECK(run("run dressed_ramsey --set delta_rf=160Hz --set shots=5 --set points=3 -o " + tmp("ramsey")).code == 0);
  CHECK(run("seq \"mw plus pi rabi=1kHz;bogus\" --inline").code == 1);
  const auto diag = run("seq \"mw plus pi rabi=1kHz;bogus\" --inline");
  CHECK(diag.out.find("<inline>:2:1: error:") != std::string::npos);
  CHECK(run("run rabi_bare --set prop_norm_tol=1e-30 --set prop_method=rk4 --set shots=1 --set points=3 -o " +
            tmp("drift"))
            .code == 2);
  CHECK(run("run dressed_lifetime --set fit_max_redchi2=1e-9 --set shots=50 --set points=5 -o " + tmp("fit")).code ==
        2);
}

TEST_CASE("cli: sequence tools") {
  const std::string seq = std::string(DSQ_SEQUENCE_DIR) + "/clock_rabi.seq";
  const auto d = run("dump-controls " + seq + " --samples 4");
  CHECK(d.code == 0);
  CHECK(d.out.rfind("t_s,omega_plus", 0) == 0);
  CHECK(run("seq " + seq + " --set shots=10 -o " + tmp("seq")).code == 0);
  const auto f = run("detector-fidelity --shots 2000");
  CHECK(f.code == 0);
  CHECK(f.out.find("f_mean") != std::string::npos);
  CHECK(run("calibrate-noise --t2 40ms --shots 200").code == 0);
  CHECK(run("calibrate-noise --t2 fast").code == 1);
}
