#pragma once

#include <string>

#include "mdm/meanfield.hpp"

namespace mdm {

/// Critical constants of the mean-field imitative model, computed once and
/// persisted so that downstream checks all use the same numbers.
struct ReferenceValues {
  double h_c = 0.0;
  double J_c = 0.0;
  double m_c = 0.0;
  double t_star = 0.0;
  double lambda_c = 0.0;
  double critical_tol = 1e-8;      // certification tolerance for psi'', psi'''
  double coexistence_tol = 1e-13;  // bisection tolerance on the psi gap
  std::string provenance = "derived";
  std::string version;

  friend bool operator==(const ReferenceValues&, const ReferenceValues&) = default;
};

ReferenceValues make_reference_values(double tol = 1e-8);

std::string to_json(const ReferenceValues& ref);
/// Throws InvalidInputError on malformed documents or a version other than
/// the library's, with a hint to regenerate the file.
ReferenceValues reference_values_from_json(const std::string& text);

/// Atomic write (temporary file + rename).
void save_reference_values(const ReferenceValues& ref, const std::string& path);
ReferenceValues load_reference_values(const std::string& path);

/// Writes `content` to `path` through a temporary file in the same directory.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mdm
