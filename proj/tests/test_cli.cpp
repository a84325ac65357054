#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hrtsim_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HRTSIM_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("cli: a short run succeeds and writes its outputs") {
  const fs::path out = scratch() / "run";
  CHECK(run_cli("run --ticks 100 --seed 3 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "runs.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(run_cli("replay --manifest " + (out / "manifest.json").string() + " --out " + (scratch() / "replay").string()) == 0);
  std::ifstream a(out / "runs.csv"), b(scratch() / "replay" / "runs.csv");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("cli: configuration errors exit with 1") {
  const fs::path bad = scratch() / "bad.json";
  write(bad, R"({"robot-reliability": 150})");
  CHECK(run_cli("run --ticks 10 --config " + bad.string() + " --out " + (scratch() / "x").string()) == 1);
  const fs::path unknown = scratch() / "unknown.json";
  write(unknown, R"({"robot-charm": 1})");
  CHECK(run_cli("run --ticks 10 --config " + unknown.string() + " --out " + (scratch() / "x").string()) == 1);
  CHECK(run_cli("run --ticks 10 --config " + (scratch() / "absent.json").string()) == 1);
  CHECK(run_cli("sweep --factor luck --reps 2 --ticks 10 --out " + (scratch() / "x").string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("cli: unwritable output exits with 2") {
  const fs::path blocker = scratch() / "blocker";
  write(blocker, "not a directory");
  CHECK(run_cli("run --ticks 10 --out " + (blocker / "out").string()) == 2);
}
