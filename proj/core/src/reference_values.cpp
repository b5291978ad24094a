#include "mdm/reference_values.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdm/error.hpp"
#include "mdm/version.hpp"

namespace mdm {

ReferenceValues make_reference_values(double tol) {
  const CriticalPoint cp = critical_point(tol);
  ReferenceValues ref;
  ref.h_c = cp.h_c;
  ref.J_c = cp.J_c;
  ref.m_c = cp.m_c;
  ref.t_star = cp.t_star;
  ref.lambda_c = cp.lambda_c;
  ref.critical_tol = tol;
  ref.version = kVersion;
  return ref;
}

std::string to_json(const ReferenceValues& ref) {
  // nlohmann prints doubles with round-trip precision, so reloading is bit-exact
  nlohmann::ordered_json doc;
  doc["h_c"] = ref.h_c;
  doc["J_c"] = ref.J_c;
  doc["m_c"] = ref.m_c;
  doc["t_star"] = ref.t_star;
  doc["lambda_c"] = ref.lambda_c;
  doc["tolerances"] = {{"critical", ref.critical_tol}, {"coexistence", ref.coexistence_tol}};
  doc["provenance"] = ref.provenance;
  doc["version"] = ref.version;
  return doc.dump(2) + "\n";
}

ReferenceValues reference_values_from_json(const std::string& text) {
  const std::string hint = "; regenerate it with `mdm meanfield critical --out <file>`";
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("reference values: ") + e.what() + hint);
  }
  ReferenceValues ref;
  try {
    ref.version = doc.at("version").get<std::string>();
    if (ref.version != kVersion)
      throw InvalidInputError("reference values were written by version " + ref.version + ", this is " + kVersion + hint);
    ref.h_c = doc.at("h_c").get<double>();
    ref.J_c = doc.at("J_c").get<double>();
    ref.m_c = doc.at("m_c").get<double>();
    ref.t_star = doc.at("t_star").get<double>();
    ref.lambda_c = doc.at("lambda_c").get<double>();
    ref.critical_tol = doc.at("tolerances").at("critical").get<double>();
    ref.coexistence_tol = doc.at("tolerances").at("coexistence").get<double>();
    ref.provenance = doc.at("provenance").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("reference values: ") + e.what() + hint);
  }
  return ref;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InvalidInputError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidInputError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

void save_reference_values(const ReferenceValues& ref, const std::string& path) { write_file_atomic(path, to_json(ref)); }

ReferenceValues load_reference_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("reference values file '" + path + "' not found; generate it with `mdm meanfield critical --out " + path + "`");
  std::stringstream ss;
  ss << in.rdbuf();
  return reference_values_from_json(ss.str());
}

}  // namespace mdm
