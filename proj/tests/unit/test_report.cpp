#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cyclesched/report.hpp"

using namespace cyclesched;

namespace {

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Report, CdfRowsPerJob) {
  SimReport r;
  r.cdf = delay_cdf({0.0, 0.25, 1.0});
  std::ostringstream out;
  write_cdf_csv(r.cdf, out);
  EXPECT_EQ(count_lines(out.str()), 4u);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "normalized_delay,cumulative_fraction");
  EXPECT_NE(out.str().find("1.0000,1.0000"), std::string::npos);
}

TEST(Report, EmptyJobSet) {
  SimReport r;
  std::ostringstream cdf;
  write_cdf_csv(r.cdf, cdf);
  EXPECT_EQ(cdf.str(), "normalized_delay,cumulative_fraction\n");
  auto j = summary_json(r);
  EXPECT_EQ(j["makespan"], 0.0);
  EXPECT_TRUE(j["jobs"].empty());
}

TEST(Report, TimelineRows) {
  std::vector<SimEvent> ev{{0, 0, "a", "r", "load_start"}, {5, 0, "a", "r", "load_finish"},
                           {5, 0, "a", "r", "start"},      {9, 0, "a", "r", "finish"},
                           {9, -1, "a", "", "complete"}};
  std::ostringstream out;
  write_timeline_csv(ev, out);
  EXPECT_EQ(out.str(),
            "group,job,request,kind,start,end\n0,a,r,load,0.0000,5.0000\n0,a,r,exec,5.0000,9.0000\n");
}

TEST(Report, EventsJsonl) {
  std::ostringstream out;
  write_events_jsonl({{1.23456, 2, "a", "r", "start"}}, out);
  EXPECT_EQ(out.str(), R"({"t":1.2346,"group":2,"job":"a","request":"r","action":"start"})"
                       "\n");
}

TEST(Report, EmitWritesAllArtifacts) {
  auto dir = std::filesystem::temp_directory_path() / "cyclesched_report_test";
  std::filesystem::remove_all(dir);
  SimReport r;
  r.makespan = 12.5;
  auto files = emit_report(r, dir / "nested");
  EXPECT_EQ(files.size(), 4u);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::is_regular_file(f)) << f;
  std::ifstream in(dir / "nested" / "summary.json");
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["makespan"], 12.5);
  std::filesystem::remove_all(dir);
}

TEST(Report, Round4) {
  EXPECT_EQ(round4(0.12345), 0.1235);
  EXPECT_EQ(round4(-0.00001), 0.0);
}
