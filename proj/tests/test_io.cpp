#include <bit>
#include <cmath>
#include <filesystem>

#include <unistd.h>

#include <gtest/gtest.h>

#include "capcover/cover.hpp"
#include "capcover/generators.hpp"
#include "capcover/io.hpp"
#include "capcover/svg.hpp"

using namespace capcover;

namespace {

// SHA-256 of the tangent-chain plot; update deliberately when the renderer
// changes.
constexpr const char* kSvgFixtureSha256 = 
    "dc5f97f03e4938005c62d389081d7fea776410e57fe08163d729eb3926c26e22";

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (std::isnan(a) && std::isnan(b));
}

bool same_bits(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

void expect_same(const Instance& a, const Instance& b) {
  ASSERT_EQ(a.dim, b.dim);
  ASSERT_EQ(a.caps.size(), b.caps.size());
  for (std::size_t i = 0; i < a.caps.size(); ++i) {
    EXPECT_TRUE(same_bits(a.caps[i].center, b.caps[i].center));
    EXPECT_TRUE(same_bits(a.caps[i].radius, b.caps[i].radius));
  }
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("capcover_test_" + std::to_string(::getpid()) + "_" + name);
}

// Expects parse_instance to fail on `line` for `field`.
void expect_format_error(const std::string& text, std::size_t line,
                         const std::string& field) {
  try {
    parse_instance(text, "t.json");
    FAIL() << "accepted:\n" << text;
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.field(), field) << e.what();
    EXPECT_NE(std::string(e.what()).find("t.json:"), std::string::npos);
  }
}

}  // namespace

TEST(InstanceIO, RoundTripIsBitExact) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Instance inst = gen_random_tree(1 + s % 4, 1 + s % 9, s);
    const Instance back = parse_instance(instance_to_json(inst));
    expect_same(inst, back);
    EXPECT_EQ(instance_to_json(back), instance_to_json(inst));
  }
}

TEST(InstanceIO, SaveLoadFile) {
  const auto path = temp_path("inst.json");
  const Instance inst = gen_separable(3, 2);
  save_instance(path, inst);
  expect_same(inst, load_instance(path));
  std::filesystem::remove(path);
}

TEST(InstanceIO, NormalizesNearlyUnitCenters) {
  const Instance inst = parse_instance(R"({"format_version": 1, "dim": 2,
    "caps": [{"center": [1.0000005, 0, 0], "radius": 0.25}]})");
  EXPECT_EQ(inst.caps[0].center[0], 1.0);
  expect_format_error(R"({"format_version": 1, "dim": 2,
    "caps": [{"center": [1.00001, 0, 0], "radius": 0.25}]})",
                      2, "/caps/0/center");
}

TEST(InstanceIO, DiagnosticsNameLineAndField) {
  expect_format_error("{\"format_version\": 1, \"dim\": 2,\n"
                      " \"caps\": [\n"
                      "  {\"center\": [1, 0, 0], \"radius\": 0.3},\n"
                      "  {\"center\": [0, 1, 0], \"radius\": 2.0}\n"
                      " ]}\n",
                      4, "/caps/1/radius");
  expect_format_error("{\"format_version\": 1, \"dim\": 2,\n"
                      " \"caps\": [\n"
                      "  {\"center\": [1, 0], \"radius\": 0.3}\n"
                      " ]}\n",
                      3, "/caps/0/center");
  expect_format_error("{\"format_version\": 1, \"dim\": 2,\n"
                      " \"caps\": [\n"
                      "  {\"center\": [1, 0, 0]}\n"
                      " ]}\n",
                      3, "/caps/0/radius");
  expect_format_error("{\"format_version\": 2, \"dim\": 2, \"caps\": []}", 1,
                      "/format_version");
  expect_format_error("{\"format_version\": 1,\n\"dim\": \"two\",\n"
                      "\"caps\": []}",
                      2, "/dim");
  expect_format_error("{\"format_version\": 1, \"dim\": 2,\n\"caps\": []}", 2,
                      "/caps");
  expect_format_error("{\"format_version\": 1,\n \"dim\": 2,\n \"caps\": [}", 3,
                      "");
  expect_format_error("[1, 2]", 1, "");
}

TEST(InstanceIO, Digest) {
  const Instance a = gen_random_tree(2, 4, 1);
  EXPECT_EQ(instance_digest(a), instance_digest(parse_instance(instance_to_json(a))));
  EXPECT_EQ(instance_digest(a).size(), 64u);
  Instance b = a;
  b.caps[2].radius = std::nextafter(b.caps[2].radius, 1.0);
  EXPECT_NE(instance_digest(a), instance_digest(b));
  Instance c = a;
  std::swap(c.caps[0], c.caps[1]);
  EXPECT_NE(instance_digest(a), instance_digest(c));
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CertificateIO, RoundTripIsBitExact) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Instance inst = gen_random_tree(2 + s % 2, 2 + s % 8, s);
    CertificateFile f;
    f.instance_digest = instance_digest(inst);
    f.seed = s;
    CoverOptions opt;
    opt.solver.overlap_shortcut = s % 3 != 0;
    f.certificate = cover_caps(inst, opt);
    const std::string text = certificate_to_json(f);
    const CertificateFile g = parse_certificate(text);
    EXPECT_EQ(certificate_to_json(g), text);

    const CoverCertificate& a = f.certificate;
    const CoverCertificate& b = g.certificate;
    EXPECT_EQ(g.instance_digest, f.instance_digest);
    EXPECT_EQ(g.seed, f.seed);
    EXPECT_EQ(g.tool_version, f.tool_version);
    EXPECT_TRUE(same_bits(a.cover_cap.center, b.cover_cap.center));
    EXPECT_TRUE(same_bits(a.cover_cap.radius, b.cover_cap.radius));
    EXPECT_TRUE(same_bits(a.final_w, b.final_w));
    ASSERT_EQ(a.containment_slacks.size(), b.containment_slacks.size());
    for (std::size_t i = 0; i < a.containment_slacks.size(); ++i) {
      EXPECT_TRUE(same_bits(a.containment_slacks[i], b.containment_slacks[i]));
    }
    ASSERT_EQ(a.merge_trace.size(), b.merge_trace.size());
    for (std::size_t i = 0; i < a.merge_trace.size(); ++i) {
      EXPECT_EQ(a.merge_trace[i].members, b.merge_trace[i].members);
      EXPECT_TRUE(same_bits(a.merge_trace[i].norm_slack, b.merge_trace[i].norm_slack));
    }
    EXPECT_EQ(a.separability.status, b.separability.status);
    EXPECT_EQ(a.separability.method, b.separability.method);
    EXPECT_TRUE(same_bits(a.separability.best_margin, b.separability.best_margin));
    EXPECT_EQ(a.valid, b.valid);
    EXPECT_EQ(a.heuristic_signing, b.heuristic_signing);
  }
}

TEST(CertificateIO, RejectsMalformed) {
  EXPECT_THROW(parse_certificate("{\"format_version\": 1}"), FormatError);
  const Instance inst = gen_random_tree(2, 3, 1);
  CertificateFile f;
  f.certificate = cover_caps(inst, CoverOptions{});
  std::string text = certificate_to_json(f);
  const auto pos = text.find("\"nonseparable\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 14, "\"unsure\"");
  try {
    parse_certificate(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "/separability/status");
  }
}

TEST(Files, AtomicWriteReplaces) {
  const auto path = temp_path("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  for (const auto& entry :
       std::filesystem::directory_iterator(path.parent_path())) {
    EXPECT_EQ(entry.path().string().find(path.string() + ".tmp"),
              std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_file(path), FormatError);
}

TEST(Svg, TangentChainFixture) {
  const std::vector<double> r(3, kPi / 12);
  PlotInput in;
  in.instance = gen_chain_on_equator(2, r, 0.0);
  const CoverCertificate cert = cover_caps(in.instance, CoverOptions{});
  in.cover = cert.cover_cap;
  // The cover circle is internally tangent to both end caps.
  EXPECT_NEAR(cert.containment_slacks.front(), 0.0, 1e-12);
  EXPECT_NEAR(cert.containment_slacks.back(), 0.0, 1e-12);

  const std::string svg = render_svg(in);
  EXPECT_EQ(render_svg(in), svg);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_EQ(sha256_hex(svg), kSvgFixtureSha256);
}

TEST(Svg, SeparableWitnessAndErrors) {
  PlotInput in;
  in.instance = gen_separable(2, 3);
  Vector n(3);
  n << 0, 0, 1;
  in.witness_normal = n;
  const std::string svg = render_svg(in);
  EXPECT_NE(svg.find("#d62728"), std::string::npos);

  PlotInput bad;
  bad.instance = gen_separable(3, 3);
  EXPECT_THROW(render_svg(bad), ValidationError);
}
