#pragma once

#include <string>
#include <vector>

namespace hyperend {

struct ReportItem {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct Report {
  std::vector<ReportItem> items;

  bool all_pass() const {
    for (const auto& it : items) {
      if (!it.pass) return false;
    }
    return true;
  }

  const ReportItem& item(const std::string& name) const {
    for (const auto& it : items) {
      if (it.name == name) return it;
    }
    static const ReportItem missing{"missing", false, 0.0, "no such item"};
    return missing;
  }
};

}  // namespace hyperend
