#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "nldt/nldt.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

// stdout only; stderr goes to a file so diagnostics do not mix into CSV
Result run(const std::string& args) {
  const std::string cmd = std::string(NLDT_CLI) + " " + args + " 2>" + (fs::temp_directory_path() / "nldt_cli.err").string();
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() / ("nldt_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

const char* kQuick = "--upper-gen 5 --lower-gen 10";

}  // namespace

TEST_F(Cli, DatagenRowCounts) {
  ASSERT_EQ(run("datagen ds1 --seed 3 -o " + path("ds1.csv")).code, 0);
  const auto ds1 = nldt::read_csv(path("ds1.csv"));
  EXPECT_EQ(ds1.size(), 200u);
  EXPECT_EQ(ds1.dim(), 2u);

  ASSERT_EQ(run("datagen m-zdt1-2-30 -o " + path("z.csv")).code, 0);
  const auto z = nldt::read_csv(path("z.csv"));
  EXPECT_EQ(z.size(), 2000u);
  EXPECT_EQ(z.dim(), 30u);
}

TEST_F(Cli, DatagenIsDeterministic) {
  const auto a = run("datagen ds2 --seed 7");
  const auto b = run("datagen ds2 --seed 7");
  const auto c = run("datagen ds2 --seed 8");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(a.out.rfind("x1,x2,label\n", 0), 0u);
}

TEST_F(Cli, TrainEvalPrintExport) {
  ASSERT_EQ(run("datagen ds1 -o " + path("d.csv")).code, 0);
  const auto train = run("train " + path("d.csv") + " -o " + path("m.json") + " " + kQuick);
  ASSERT_EQ(train.code, 0);
  EXPECT_NE(train.out.find("training accuracy"), std::string::npos);
  ASSERT_TRUE(fs::exists(path("m.json")));

  const auto again = run("train " + path("d.csv") + " -o " + path("m2.json") + " " + kQuick);
  EXPECT_EQ(slurp(path("m.json")), slurp(path("m2.json")));

  const auto ev = run("eval " + path("m.json") + " " + path("d.csv"));
  ASSERT_EQ(ev.code, 0);
  EXPECT_NE(ev.out.find("NLDT accuracy"), std::string::npos);

  const auto pt = run("print-tree " + path("m.json"));
  ASSERT_EQ(pt.code, 0);
  EXPECT_NE(pt.out.find("rules"), std::string::npos);

  const auto model = nldt::load_model(path("m.json"));
  if (model.root.is_leaf()) GTEST_SKIP() << "quick run produced a single leaf";
  ASSERT_EQ(run("export-bspace " + path("m.json") + " " + path("d.csv") + " -o " + path("b.csv")).code, 0);
  std::ifstream in(path("b.csv"));
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "B1,B2,B3,label,f");
  const auto data = nldt::read_csv(path("d.csv"));
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    // sign of f must agree with routing at the root
    const double f = std::stod(line.substr(line.rfind(',') + 1));
    const auto s = model.scaler.apply(data.row(rows));
    EXPECT_EQ(f <= 0.0, nldt::goes_left(model.root.rule, s));
    ++rows;
  }
  EXPECT_EQ(rows, data.size());
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run("datagen no-such-set").code, 0);
  EXPECT_NE(run("eval " + path("missing.json") + " " + path("missing.csv")).code, 0);
  std::ofstream(path("bad.csv")) << "a,label\n1,0\nx,1\n";
  EXPECT_EQ(run("train " + path("bad.csv")).code, 1);
  std::ofstream(path("pure.csv")) << "a,label\n1,0\n2,0\n";
  EXPECT_EQ(run("train " + path("pure.csv")).code, 1);
  EXPECT_NE(run("train " + path("pure.csv") + " --tau-i 0.7").code, 0);
  EXPECT_NE(run("").code, 0);
}
