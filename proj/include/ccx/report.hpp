#pragma once

#include <string>

#include <json.hpp>

namespace ccx {

/// Versioned machine-readable report: the resolved configuration, one verdict
/// per check with its tolerance, and free-form data. Keys are sorted and no
/// timings are recorded, so equal runs dump to equal bytes.
class Report {
 public:
  static constexpr int kSchema = 1;

  Report(std::string command, nlohmann::json config);

  /// Records a check. `value` is the measured quantity (a residual, a norm,
  /// a slope) and `tolerance` the bound it was held to.
  void check(const std::string& name, bool pass, double value, double tolerance,
             nlohmann::json detail = nlohmann::json::object());
  /// Appends the checks of `sub` under "<sub command>/<name>" and files its
  /// data and config under its command.
  void merge(const Report& sub);

  nlohmann::json& data() noexcept { return data_; }
  [[nodiscard]] const nlohmann::json& checks() const noexcept { return checks_; }
  [[nodiscard]] const std::string& command() const noexcept { return command_; }
  [[nodiscard]] bool all_pass() const;

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string dump() const;
  /// One "PASS|FAIL name value (tol)" line per check.
  [[nodiscard]] std::string text() const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json checks_ = nlohmann::json::array();
  nlohmann::json data_ = nlohmann::json::object();
};

}  // namespace ccx
