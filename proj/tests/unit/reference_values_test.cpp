#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "mdm/error.hpp"
#include "mdm/reference_values.hpp"
#include "mdm/version.hpp"

namespace mdm {
namespace {

TEST(ReferenceValues, FromCriticalPoint) {
  const auto ref = make_reference_values();
  const auto cp = critical_point();
  EXPECT_EQ(ref.h_c, cp.h_c);
  EXPECT_EQ(ref.J_c, cp.J_c);
  EXPECT_EQ(ref.lambda_c, cp.lambda_c);
  EXPECT_EQ(ref.provenance, "derived");
  EXPECT_EQ(ref.version, std::string(kVersion));
  EXPECT_EQ(make_reference_values(), ref);
}

TEST(ReferenceValues, RoundTripIsBitExact) {
  const auto ref = make_reference_values();
  EXPECT_EQ(reference_values_from_json(to_json(ref)), ref);
  const std::string path = ::testing::TempDir() + "mdm_ref_roundtrip.json";
  save_reference_values(ref, path);
  EXPECT_EQ(load_reference_values(path), ref);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST(ReferenceValues, StaleVersionRefused) {
  auto doc = nlohmann::json::parse(to_json(make_reference_values()));
  doc["version"] = "0.0.1";
  try {
    reference_values_from_json(doc.dump());
    FAIL() << "stale file accepted";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("meanfield critical"), std::string::npos);
  }
}

TEST(ReferenceValues, MalformedAndMissing) {
  EXPECT_THROW(reference_values_from_json("{\"h_c\": 1}"), InvalidInputError);
  EXPECT_THROW(reference_values_from_json("not json"), InvalidInputError);
  EXPECT_THROW(load_reference_values(::testing::TempDir() + "no_such_reference.json"), InvalidInputError);
}

TEST(WriteFileAtomic, ReplacesContent) {
  const std::string path = ::testing::TempDir() + "mdm_atomic.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(s, "second");
}

}  // namespace
}  // namespace mdm
