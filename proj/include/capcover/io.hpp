// JSON instance and certificate files.
//
// Instance:    {"format_version": 1, "dim": d,
//               "caps": [{"center": [..d+1..], "radius": r}, ...]}
// Certificate: cover, slacks, merge trace, separability verdict, heuristic
//              flag, tool version, seed, and the SHA-256 digest of the
//              instance it was computed for.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "capcover/cover.hpp"
#include "capcover/sphere.hpp"

namespace capcover {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

// A file that is not valid JSON or does not match the schema. `line` is
// 1-based (0 when unknown) and `field` a JSON pointer such as
// "/caps/2/radius".
class FormatError : public Error {
 public:
  FormatError(std::string source, std::size_t line, std::string field,
              const std::string& message);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

struct CertificateFile {
  std::string instance_digest;
  std::string tool_version{kToolVersion};
  std::uint64_t seed = 0;
  CoverCertificate certificate;
};

std::string sha256_hex(std::string_view bytes);

// Hex SHA-256 over the dimension, cap count and the IEEE-754 bit patterns of
// every center coordinate and radius.
std::string instance_digest(const Instance& inst);

std::string instance_to_json(const Instance& inst);
Instance parse_instance(std::string_view text,
                        const std::string& source = "<input>");
Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& inst);

std::string certificate_to_json(const CertificateFile& cert);
CertificateFile parse_certificate(std::string_view text,
                                  const std::string& source = "<input>");
CertificateFile load_certificate(const std::filesystem::path& path);
void save_certificate(const std::filesystem::path& path,
                      const CertificateFile& cert);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace capcover
