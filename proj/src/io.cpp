#include "capcover/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace capcover {

using json = nlohmann::ordered_json;

FormatError::FormatError(std::string source, std::size_t line,
                         std::string field, const std::string& message)
    : Error(fmt::format("{}:{}: {}{}", source, line,
                        field.empty() ? std::string()
                                      : fmt::format("field {}: ", field),
                        message)),
      line_(line),
      field_(std::move(field)) {}

// ---------------------------------------------------------------------------
// digest

namespace {

void append_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}

void append_double(std::string& buf, double x) {
  if (x == 0.0) x = 0.0;  // fold -0 into +0
  append_u64(buf, std::bit_cast<std::uint64_t>(x));
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string instance_digest(const Instance& inst) {
  std::string buf = "capcover-instance-v1";
  append_u64(buf, static_cast<std::uint64_t>(inst.dim));
  append_u64(buf, inst.caps.size());
  for (const Cap& c : inst.caps) {
    for (Eigen::Index i = 0; i < c.center.size(); ++i) {
      append_double(buf, c.center[i]);
    }
    append_double(buf, c.radius);
  }
  return sha256_hex(buf);
}

// ---------------------------------------------------------------------------
// files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path.string(), 0, "", "cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(fmt::format("short write to {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(fmt::format("cannot rename {} to {}: {}", tmp.string(),
                            path.string(), ec.message()));
  }
}

// ---------------------------------------------------------------------------
// parsing with line information

namespace {

// Input iterator that publishes how far the parser has read.
class TrackingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  TrackingIterator(const char* p, const char** cursor)
      : p_(p), cursor_(cursor) {}
  reference operator*() const { return *p_; }
  TrackingIterator& operator++() {
    ++p_;
    if (cursor_) *cursor_ = p_;
    return *this;
  }
  TrackingIterator operator++(int) {
    TrackingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const TrackingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  const char** cursor_;
};

// Records the line on which each JSON value ends, keyed by JSON pointer.
class LineRecorder : public nlohmann::json_sax<json> {
 public:
  LineRecorder(std::string_view text, const char** cursor)
      : text_(text), cursor_(cursor) {}

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override {
    return scalar();
  }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override {
    begin_value();
    stack_.push_back(Frame{false, 0, {}});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = k;
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    end_value();
    return true;
  }
  bool start_array(std::size_t) override {
    begin_value();
    stack_.push_back(Frame{true, 0, {}});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    end_value();
    return true;
  }
  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    error_ = ex.what();
    error_line_ = current_line();
    return false;
  }

  std::map<std::string, std::size_t> lines;
  std::string error_;
  std::size_t error_line_ = 0;

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };

  // The lexer reads one character past a number, so back up over
  // whitespace to the last consumed token character.
  std::size_t current_line() const {
    std::size_t end = static_cast<std::size_t>(*cursor_ - text_.data());
    end = std::min(end, text_.size());
    while (end > 0 && std::isspace(static_cast<unsigned char>(text_[end - 1]))) {
      --end;
    }
    return 1 + static_cast<std::size_t>(
                   std::count(text_.begin(), text_.begin() + end, '\n'));
  }

  std::string path() const {
    std::string p;
    for (const Frame& f : stack_) {
      p += '/';
      p += f.array ? std::to_string(f.index) : f.key;
    }
    return p;
  }

  void begin_value() { lines[path()] = current_line(); }
  void end_value() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
  }
  bool scalar() {
    begin_value();
    end_value();
    return true;
  }

  std::string_view text_;
  const char** cursor_;
  std::vector<Frame> stack_;
};

class Document {
 public:
  Document(std::string_view text, std::string source)
      : source_(std::move(source)) {
    const char* cursor = text.data();
    LineRecorder rec(text, &cursor);
    const bool ok = json::sax_parse(
        TrackingIterator(text.data(), &cursor),
        TrackingIterator(text.data() + text.size(), nullptr), &rec);
    if (!ok) {
      throw FormatError(source_, rec.error_line_, "",
                        fmt::format("invalid JSON: {}", rec.error_));
    }
    lines_ = std::move(rec.lines);
    root_ = json::parse(text.begin(), text.end());
  }

  const json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& field,
                         const std::string& message) const {
    // Missing fields are reported at their parent's line.
    std::string p = field;
    auto it = lines_.find(p);
    while (it == lines_.end() && !p.empty()) {
      p = p.substr(0, p.rfind('/'));
      it = lines_.find(p);
    }
    throw FormatError(source_, it == lines_.end() ? 0 : it->second, field,
                      message);
  }

  const json& at(const json& obj, const std::string& ptr,
                 const std::string& key) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(ptr + "/" + key, "missing");
    return *it;
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    return v.get<double>();
  }

  // Numbers, or null for NaN.
  double number_or_nan(const json& v, const std::string& ptr) const {
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return number(v, ptr);
  }

  std::int64_t integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail(ptr, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_unsigned()) fail(ptr, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const json& v, const std::string& ptr) const {
    if (!v.is_boolean()) fail(ptr, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected an array");
    return v;
  }

  Vector vector(const json& v, const std::string& ptr,
                std::ptrdiff_t expected = -1) const {
    array(v, ptr);
    if (expected >= 0 && static_cast<std::ptrdiff_t>(v.size()) != expected) {
      fail(ptr, fmt::format("expected {} coordinates, got {}", expected,
                            v.size()));
    }
    if (v.empty()) fail(ptr, "empty vector");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] =
          number(v[i], fmt::format("{}/{}", ptr, i));
    }
    return out;
  }

  std::vector<double> doubles(const json& v, const std::string& ptr) const {
    array(v, ptr);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number_or_nan(v[i], fmt::format("{}/{}", ptr, i)));
    }
    return out;
  }

  std::vector<int> ints(const json& v, const std::string& ptr) const {
    array(v, ptr);
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(
          static_cast<int>(integer(v[i], fmt::format("{}/{}", ptr, i))));
    }
    return out;
  }

 private:
  std::string source_;
  std::map<std::string, std::size_t> lines_;
  json root_;
};

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json cap_json(const Cap& c) {
  json o = json::object();
  o["center"] = vector_json(c.center);
  o["radius"] = c.radius;
  return o;
}

// Center read from a file: must be within 1e-6 of unit length. Vectors that
// are already unit to rounding are kept bit-for-bit.
Vector load_center(const Document& doc, const json& v, const std::string& ptr,
                   int dim) {
  Vector c = doc.vector(v, ptr, dim + 1);
  const double norm = c.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
    doc.fail(ptr, fmt::format("norm {:.17g} deviates from 1 by more than 1e-6",
                              norm));
  }
  if (std::abs(norm - 1.0) > 4 * std::numeric_limits<double>::epsilon()) {
    c /= norm;
  }
  return c;
}

Cap load_cap(const Document& doc, const json& v, const std::string& ptr,
             int dim) {
  Cap c;
  c.center = load_center(doc, doc.at(v, ptr, "center"), ptr + "/center", dim);
  c.radius = doc.number(doc.at(v, ptr, "radius"), ptr + "/radius");
  if (!(c.radius > 0.0 && c.radius < kHalfPi)) {
    doc.fail(ptr + "/radius",
             fmt::format("radius {:.17g} outside (0, pi/2)", c.radius));
  }
  return c;
}

int load_dim(const Document& doc, const json& root) {
  const std::int64_t dim = doc.integer(doc.at(root, "", "dim"), "/dim");
  if (dim < 1 || dim > 1000) doc.fail("/dim", "dim must lie in [1, 1000]");
  return static_cast<int>(dim);
}

void check_version(const Document& doc, const json& root) {
  const std::int64_t v =
      doc.integer(doc.at(root, "", "format_version"), "/format_version");
  if (v != kFormatVersion) {
    doc.fail("/format_version",
             fmt::format("unsupported format_version {}", v));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// instances

std::string instance_to_json(const Instance& inst) {
  json o = json::object();
  o["format_version"] = kFormatVersion;
  o["dim"] = inst.dim;
  json caps = json::array();
  for (const Cap& c : inst.caps) caps.push_back(cap_json(c));
  o["caps"] = std::move(caps);
  return o.dump(2) + "\n";
}

Instance parse_instance(std::string_view text, const std::string& source) {
  Document doc(text, source);
  const json& root = doc.root();
  if (!root.is_object()) doc.fail("", "expected an object");
  check_version(doc, root);
  Instance inst;
  inst.dim = load_dim(doc, root);
  const json& caps = doc.array(doc.at(root, "", "caps"), "/caps");
  if (caps.empty()) doc.fail("/caps", "at least one cap is required");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    inst.caps.push_back(
        load_cap(doc, caps[i], fmt::format("/caps/{}", i), inst.dim));
  }
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_file(path), path.string());
}

void save_instance(const std::filesystem::path& path, const Instance& inst) {
  write_file_atomic(path, instance_to_json(inst));
}

// ---------------------------------------------------------------------------
// certificates

std::string certificate_to_json(const CertificateFile& file) {
  const CoverCertificate& c = file.certificate;
  json o = json::object();
  o["format_version"] = kFormatVersion;
  o["tool"] = "capcover";
  o["tool_version"] = file.tool_version;
  o["seed"] = file.seed;
  o["instance_digest"] = file.instance_digest;
  o["valid"] = c.valid;
  o["dim"] = c.cover_cap.center.size() - 1;
  o["cover"] = cap_json(c.cover_cap);

  json inputs = json::array();
  for (const Cap& cap : c.input_caps) inputs.push_back(cap_json(cap));
  o["input_caps"] = std::move(inputs);
  o["containment_slacks"] = c.containment_slacks;
  o["final_w"] = vector_json(c.final_w);
  o["initial_w_norm"] = c.initial_w_norm;
  o["heuristic_signing"] = c.heuristic_signing;

  json trace = json::array();
  for (const MergeStep& s : c.merge_trace) {
    json t = json::object();
    t["merged_indices"] = s.merged_indices;
    t["members"] = s.members;
    t["normal"] = vector_json(s.new_zone.normal);
    t["half_width"] = s.new_zone.half_width;
    t["norm_slack"] = s.norm_slack;
    t["member_slacks"] = s.member_slacks;
    t["half_width_sum_before"] = s.half_width_sum_before;
    t["half_width_sum_after"] = s.half_width_sum_after;
    trace.push_back(std::move(t));
  }
  o["merge_trace"] = std::move(trace);

  const SeparabilityVerdict& v = c.separability;
  json sep = json::object();
  sep["status"] = to_string(v.status);
  sep["method"] = to_string(v.method);
  sep["best_margin"] = v.best_margin;  // NaN is written as null
  sep["patterns_checked"] = v.patterns_checked;
  sep["witness_normal"] =
      v.witness_normal ? vector_json(*v.witness_normal) : json(nullptr);
  sep["witness_pattern"] =
      v.witness_pattern ? json(v.witness_pattern->to_string()) : json(nullptr);
  o["separability"] = std::move(sep);
  return o.dump(2) + "\n";
}

CertificateFile parse_certificate(std::string_view text,
                                  const std::string& source) {
  Document doc(text, source);
  const json& root = doc.root();
  if (!root.is_object()) doc.fail("", "expected an object");
  check_version(doc, root);

  CertificateFile file;
  file.tool_version =
      doc.string(doc.at(root, "", "tool_version"), "/tool_version");
  file.seed = doc.unsigned_integer(doc.at(root, "", "seed"), "/seed");
  file.instance_digest =
      doc.string(doc.at(root, "", "instance_digest"), "/instance_digest");

  CoverCertificate& c = file.certificate;
  const int dim = load_dim(doc, root);
  c.valid = doc.boolean(doc.at(root, "", "valid"), "/valid");
  {
    const json& cover = doc.at(root, "", "cover");
    c.cover_cap.center =
        load_center(doc, doc.at(cover, "/cover", "center"), "/cover/center",
                    dim);
    c.cover_cap.radius =
        doc.number(doc.at(cover, "/cover", "radius"), "/cover/radius");
  }
  const json& inputs = doc.array(doc.at(root, "", "input_caps"), "/input_caps");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    c.input_caps.push_back(
        load_cap(doc, inputs[i], fmt::format("/input_caps/{}", i), dim));
  }
  c.containment_slacks = doc.doubles(
      doc.at(root, "", "containment_slacks"), "/containment_slacks");
  if (c.containment_slacks.size() != c.input_caps.size()) {
    doc.fail("/containment_slacks", "one slack per input cap expected");
  }
  c.final_w = doc.vector(doc.at(root, "", "final_w"), "/final_w", dim + 1);
  c.initial_w_norm =
      doc.number(doc.at(root, "", "initial_w_norm"), "/initial_w_norm");
  c.heuristic_signing = doc.boolean(doc.at(root, "", "heuristic_signing"),
                                    "/heuristic_signing");

  const json& trace =
      doc.array(doc.at(root, "", "merge_trace"), "/merge_trace");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::string p = fmt::format("/merge_trace/{}", i);
    const json& t = trace[i];
    MergeStep s;
    s.merged_indices =
        doc.ints(doc.at(t, p, "merged_indices"), p + "/merged_indices");
    s.members = doc.ints(doc.at(t, p, "members"), p + "/members");
    s.new_zone.normal =
        doc.vector(doc.at(t, p, "normal"), p + "/normal", dim + 1);
    s.new_zone.half_width =
        doc.number(doc.at(t, p, "half_width"), p + "/half_width");
    s.norm_slack = doc.number(doc.at(t, p, "norm_slack"), p + "/norm_slack");
    s.member_slacks =
        doc.doubles(doc.at(t, p, "member_slacks"), p + "/member_slacks");
    s.half_width_sum_before = doc.number(doc.at(t, p, "half_width_sum_before"),
                                         p + "/half_width_sum_before");
    s.half_width_sum_after = doc.number(doc.at(t, p, "half_width_sum_after"),
                                        p + "/half_width_sum_after");
    c.merge_trace.push_back(std::move(s));
  }

  const json& sep = doc.at(root, "", "separability");
  SeparabilityVerdict& v = c.separability;
  try {
    v.status = status_from_string(
        doc.string(doc.at(sep, "/separability", "status"),
                   "/separability/status"));
  } catch (const ValidationError& e) {
    doc.fail("/separability/status", e.what());
  }
  try {
    v.method = method_from_string(
        doc.string(doc.at(sep, "/separability", "method"),
                   "/separability/method"));
  } catch (const ValidationError& e) {
    doc.fail("/separability/method", e.what());
  }
  v.best_margin = doc.number_or_nan(doc.at(sep, "/separability", "best_margin"),
                                    "/separability/best_margin");
  v.patterns_checked =
      doc.unsigned_integer(doc.at(sep, "/separability", "patterns_checked"),
                           "/separability/patterns_checked");
  const json& wn = doc.at(sep, "/separability", "witness_normal");
  if (!wn.is_null()) {
    v.witness_normal =
        doc.vector(wn, "/separability/witness_normal", dim + 1);
  }
  const json& wp = doc.at(sep, "/separability", "witness_pattern");
  if (!wp.is_null()) {
    const std::string s = doc.string(wp, "/separability/witness_pattern");
    SignPattern pat;
    for (char ch : s) {
      if (ch != '+' && ch != '-') {
        doc.fail("/separability/witness_pattern", "expected '+' and '-' only");
      }
      pat.signs.push_back(ch == '+' ? 1 : -1);
    }
    v.witness_pattern = std::move(pat);
  }
  return file;
}

CertificateFile load_certificate(const std::filesystem::path& path) {
  return parse_certificate(read_file(path), path.string());
}

void save_certificate(const std::filesystem::path& path,
                      const CertificateFile& cert) {
  write_file_atomic(path, certificate_to_json(cert));
}

}  // namespace capcover
