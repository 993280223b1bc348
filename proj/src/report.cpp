#include "ccx/report.hpp"

#include <cmath>
#include <cstdio>

namespace ccx {

Report::Report(std::string command, nlohmann::json config) : command_(std::move(command)), config_(std::move(config)) {}

void Report::check(const std::string& name, bool pass, double value, double tolerance, nlohmann::json detail) {
  nlohmann::json c = {{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}};
  if (!detail.empty()) c["detail"] = std::move(detail);
  checks_.push_back(std::move(c));
}

void Report::merge(const Report& sub) {
  for (auto c : sub.checks_) {
    c["name"] = sub.command_ + "/" + c["name"].get<std::string>();
    checks_.push_back(std::move(c));
  }
  data_[sub.command_] = {{"config", sub.config_}, {"data", sub.data_}};
}

bool Report::all_pass() const {
  for (const auto& c : checks_)
    if (!c.at("pass").get<bool>()) return false;
  return true;
}

nlohmann::json Report::to_json() const {
  return {{"schema", kSchema}, {"command", command_}, {"config", config_},
          {"checks", checks_},  {"data", data_},       {"pass", all_pass()}};
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

std::string Report::text() const {
  std::string out;
  char buf[64];
  for (const auto& c : checks_) {
    const double v = c.at("value").is_number() ? c.at("value").get<double>() : std::nan("");
    const double t = c.at("tolerance").is_number() ? c.at("tolerance").get<double>() : std::nan("");
    out += c.at("pass").get<bool>() ? "PASS " : "FAIL ";
    out += c.at("name").get<std::string>();
    std::snprintf(buf, sizeof buf, " %.6g (tol %.3g)\n", v, t);
    out += buf;
  }
  return out;
}

}  // namespace ccx
