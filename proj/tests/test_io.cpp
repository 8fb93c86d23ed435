#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mccb/mccb.hpp"

using namespace mccb;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mccb_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  ErrorKind kind_of(const fs::path& p, io::Format f) {
    try {
      (void)io::load_demonstrations(p, f);
    } catch (const Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << p;
    return ErrorKind::numerical;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(IoTest, ReadsCsvDirectoryInNameOrder) {
  write("b.csv", "1,2\n3,4\n5,6\n");
  write("a.csv", "0,0\n\n1,1\n2,2\n");
  write("notes.txt", "ignored");
  const auto set = io::read_csv_dir(dir_);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.labels()[0], "a");
  EXPECT_EQ(set[1].samples()(2, 1), 6.0);
}

TEST_F(IoTest, MalformedCsvIsAConfigError) {
  EXPECT_EQ(kind_of(write("x.csv", "1,2\n3,abc\n5,6\n"), io::Format::csv_dir), ErrorKind::config);
  EXPECT_EQ(kind_of(write("x.csv", "1,2\n3\n5,6\n"), io::Format::csv_dir), ErrorKind::config);
  EXPECT_EQ(kind_of(write("x.csv", "\n\n"), io::Format::csv_dir), ErrorKind::config);
  EXPECT_EQ(kind_of(write("x.csv", "1,2\nnan,4\n5,6\n"), io::Format::csv_dir), ErrorKind::config);
  EXPECT_EQ(kind_of(write("x.csv", "1,2\n3,4\n"), io::Format::csv_dir), ErrorKind::config);  // too short
  EXPECT_EQ(kind_of(dir_ / "missing", io::Format::csv_dir), ErrorKind::config);
}

TEST_F(IoTest, ReadsJsonLines) {
  const auto p = write("d.jsonl",
                       "{\"id\":\"first\",\"samples\":[[0,0],[1,1],[2,3]]}\n"
                       "\n"
                       "{\"samples\":[[0,1],[1,2],[2,4]]}\n");
  const auto set = io::read_jsonl(p);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.labels()[0], "first");
  EXPECT_EQ(set.labels()[1], "demo1");
  EXPECT_EQ(set[1].samples()(2, 1), 4.0);
}

TEST_F(IoTest, MalformedJsonLinesAreConfigErrors) {
  EXPECT_EQ(kind_of(write("a.jsonl", "{\"samples\":[[0,0],[1],[2,2]]}\n"), io::Format::jsonl), ErrorKind::config);
  EXPECT_EQ(kind_of(write("a.jsonl", "{\"samples\":[[0,0],[1,\"x\"],[2,2]]}\n"), io::Format::jsonl),
            ErrorKind::config);
  EXPECT_EQ(kind_of(write("a.jsonl", "{not json\n"), io::Format::jsonl), ErrorKind::config);
  EXPECT_EQ(kind_of(write("a.jsonl", ""), io::Format::jsonl), ErrorKind::config);
  EXPECT_EQ(kind_of(write("a.jsonl", "{\"samples\":[]}\n"), io::Format::jsonl), ErrorKind::config);
  EXPECT_THROW(io::format_from_string("xml"), Error);
}

TEST_F(IoTest, NumbersRoundTripExactly) {
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  Eigen::MatrixXd m(50, 3);
  for (Index i = 0; i < m.size(); ++i) m(i) = u(rng) * std::pow(10.0, static_cast<double>(i % 7) - 3.0);
  m(0, 0) = std::numeric_limits<double>::denorm_min();
  m(1, 0) = -0.0;
  io::write_csv(dir_ / "m.csv", m);
  EXPECT_EQ(io::read_csv(dir_ / "m.csv").samples(), m);
  EXPECT_EQ(io::format_number(0.1), "0.1");
}

TEST(Serialize, BalanceRoundTripIsExact) {
  const auto demos = synthetic::generate(synthetic::Family::arcs, {3, 30, 6, 0.005});
  const Reproducer rep(train(demos, TrainOptions::uniform(3, 0)));
  const auto b = balance(rep, demos, {0.25, true});
  const auto text = serialize::to_json(b, demos.labels(), 0.25, Simplex3{1, 2, 3}).dump();
  const auto back = serialize::balance_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.alpha, b.alpha);
  EXPECT_EQ(back.beta, b.beta);
  EXPECT_EQ(back.weights.tangent, b.weights.tangent);
  EXPECT_EQ(back.training_sse, b.training_sse);
  ASSERT_EQ(back.grid_log.size(), b.grid_log.size());
  for (std::size_t i = 0; i < b.grid_log.size(); ++i) {
    EXPECT_EQ(back.grid_log[i].alpha, b.grid_log[i].alpha);
    EXPECT_EQ(back.grid_log[i].objective, b.grid_log[i].objective);
    EXPECT_EQ(back.grid_log[i].stage, b.grid_log[i].stage);
  }
  EXPECT_THROW(serialize::balance_from_json(nlohmann::json::parse("{\"format\":\"mccb-model\"}")), Error);
  EXPECT_THROW(serialize::model_from_json(nlohmann::json::parse("{\"format\":\"mccb-model\",\"version\":1}")), Error);
}
