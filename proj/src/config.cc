#include "kprov/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <tuple>

#include "kprov/errors.h"

namespace kprov {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Comma-separated list; blank text is an empty list, blank elements are errors.
std::vector<std::string> SplitList(std::string_view key, std::string_view text) {
  std::vector<std::string> items;
  if (Trim(text).empty()) return items;
  size_t start = 0;
  while (true) {
    size_t comma = text.find(',', start);
    std::string_view item =
        Trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (item.empty()) throw InvalidValue(std::string(key) + ": empty list element");
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

int64_t ParseInt(std::string_view key, std::string_view text, int64_t min_value) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidValue(std::string(key) + ": expected integer, got '" + std::string(text) + "'");
  }
  if (value < min_value) {
    throw InvalidValue(std::string(key) + ": must be >= " + std::to_string(min_value));
  }
  return value;
}

using Setter = std::function<void(ProvisionerConfig&, std::string_view key, std::string_view)>;

Setter IntField(int64_t ProvisionerConfig::*field, int64_t min_value) {
  return [field, min_value](ProvisionerConfig& c, std::string_view key, std::string_view v) {
    c.*field = ParseInt(key, v, min_value);
  };
}

Setter StringField(std::string ProvisionerConfig::*field) {
  return [field](ProvisionerConfig& c, std::string_view, std::string_view v) {
    c.*field = std::string(v);
  };
}

const std::vector<std::pair<std::string, Setter>>& Setters() {
  static const std::vector<std::pair<std::string, Setter>> setters = {
      {"k8s_domain", StringField(&ProvisionerConfig::k8s_domain)},
      {"namespace", StringField(&ProvisionerConfig::namespace_)},
      {"image", StringField(&ProvisionerConfig::image)},
      {"priority_class", StringField(&ProvisionerConfig::priority_class)},
      {"tolerations_list",
       [](ProvisionerConfig& c, std::string_view key, std::string_view v) {
         c.tolerations = SplitList(key, v);
       }},
      {"node_affinity_dict",
       [](ProvisionerConfig& c, std::string_view key, std::string_view v) {
         c.affinity.clear();
         for (const auto& entry : SplitList(key, v)) c.affinity.push_back(ParseAffinityEntry(entry));
       }},
      {"envs_dict",
       [](ProvisionerConfig& c, std::string_view key, std::string_view v) {
         c.env.clear();
         for (const auto& entry : SplitList(key, v)) {
           size_t colon = entry.find(':');
           if (colon == std::string::npos) {
             throw InvalidValue(std::string(key) + ": entry '" + entry + "' lacks ':'");
           }
           std::string name(Trim(std::string_view(entry).substr(0, colon)));
           if (name.empty()) throw InvalidValue(std::string(key) + ": empty variable name");
           c.env.emplace_back(name, std::string(Trim(std::string_view(entry).substr(colon + 1))));
         }
       }},
      {"secret_name", StringField(&ProvisionerConfig::secret_name)},
      {"central_manager", StringField(&ProvisionerConfig::central_manager)},
      {"filter",
       [](ProvisionerConfig& c, std::string_view, std::string_view v) { c.filter = ParseFilter(v); }},
      {"mem_quantum_mib", IntField(&ProvisionerConfig::mem_quantum_mib, 1)},
      {"disk_quantum_mib", IntField(&ProvisionerConfig::disk_quantum_mib, 1)},
      {"cycle_interval_s", IntField(&ProvisionerConfig::cycle_interval_s, 1)},
      // Zero selects instant self-termination.
      {"idle_timeout_s", IntField(&ProvisionerConfig::idle_timeout_s, 0)},
      {"max_submit_per_cycle", IntField(&ProvisionerConfig::max_submit_per_cycle, 1)},
      {"max_pods_per_group", IntField(&ProvisionerConfig::max_pods_per_group, 1)},
      {"max_total_pods", IntField(&ProvisionerConfig::max_total_pods, 1)},
      {"completed_pod_ttl_s", IntField(&ProvisionerConfig::completed_pod_ttl_s, 1)},
  };
  return setters;
}

std::string Join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

std::map<std::string, int64_t> DefaultPriorityTable() {
  return {{"opportunistic", 100}, {"normal", 1000}, {"system", 10000}};
}

AffinityRule ParseAffinityEntry(std::string_view entry) {
  entry = Trim(entry);
  AffinityRule rule;
  if (!entry.empty() && entry.front() == '^') {
    rule.negated = true;
    entry.remove_prefix(1);
  }
  size_t colon = entry.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidValue("node affinity entry '" + std::string(entry) + "' lacks ':'");
  }
  rule.key = std::string(Trim(entry.substr(0, colon)));
  if (rule.key.empty()) throw InvalidValue("node affinity entry has empty key");
  std::string_view rest = entry.substr(colon + 1);
  size_t start = 0;
  while (true) {
    size_t bar = rest.find('|', start);
    std::string_view value =
        Trim(rest.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (!value.empty()) rule.values.emplace_back(value);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (rule.values.empty()) {
    throw InvalidValue("node affinity entry for '" + rule.key + "' has no values");
  }
  return rule;
}

std::string FormatAffinityEntry(const AffinityRule& rule) {
  return (rule.negated ? "^" : "") + rule.key + ":" + Join(rule.values, "|");
}

void Validate(const ProvisionerConfig& config) {
  if (config.mem_quantum_mib < 1 || config.disk_quantum_mib < 1) {
    throw InvalidValue("quanta must be >= 1");
  }
  if (config.cycle_interval_s <= 0 || config.completed_pod_ttl_s <= 0) {
    throw InvalidValue("intervals and TTLs must be > 0");
  }
  if (config.idle_timeout_s < 0) throw InvalidValue("idle_timeout_s must be >= 0");
  if (config.max_submit_per_cycle <= 0 || config.max_pods_per_group <= 0 ||
      config.max_total_pods <= 0) {
    throw InvalidValue("caps must be > 0");
  }
  if (!config.priority_table.contains(config.priority_class)) {
    throw UnknownPriorityClass("priority_class '" + config.priority_class +
                               "' is not in the priority table");
  }
  for (const auto& t : config.tolerations) {
    if (t.empty()) throw InvalidValue("empty toleration key");
  }
}

ProvisionerConfig ParseIni(std::string_view text, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  // section -> ordered (key, value, line) entries
  std::map<std::string, std::vector<std::tuple<std::string, std::string, int>>> sections;
  std::string current;
  bool in_section = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw MalformedIni("line " + std::to_string(line_no) + ": unterminated section header");
      }
      current = std::string(Trim(line.substr(1, line.size() - 2)));
      in_section = true;
      if (current != "DEFAULT" && current != "k8s") {
        warn("line " + std::to_string(line_no) + ": ignoring unknown section [" + current + "]");
      }
      continue;
    }
    size_t eq = line.find('=');
    if (!in_section) {
      throw MalformedIni("line " + std::to_string(line_no) + ": key=value outside any section");
    }
    if (eq == std::string_view::npos) {
      throw MalformedIni("line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = Lower(Trim(line.substr(0, eq)));
    if (key.empty()) throw MalformedIni("line " + std::to_string(line_no) + ": empty key");
    sections[current].emplace_back(key, std::string(Trim(line.substr(eq + 1))), line_no);
  }

  // [k8s] overrides [DEFAULT]; last occurrence wins within a section.
  std::map<std::string, std::string> resolved;
  for (const char* name : {"DEFAULT", "k8s"}) {
    for (const auto& [key, value, line] : sections[name]) resolved[key] = value;
  }

  ProvisionerConfig config;
  for (const auto& [key, value] : resolved) {
    const auto& setters = Setters();
    auto it = std::find_if(setters.begin(), setters.end(),
                           [&](const auto& s) { return s.first == key; });
    if (it == setters.end()) {
      warn("ignoring unknown key '" + key + "'");
      continue;
    }
    it->second(config, key, value);
  }
  Validate(config);
  return config;
}

std::string ToIni(const ProvisionerConfig& c) {
  std::vector<std::string> affinity;
  for (const auto& rule : c.affinity) affinity.push_back(FormatAffinityEntry(rule));
  std::vector<std::string> env;
  for (const auto& [name, value] : c.env) env.push_back(name + ":" + value);

  std::string out = "[k8s]\n";
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("k8s_domain", c.k8s_domain);
  line("namespace", c.namespace_);
  line("image", c.image);
  line("priority_class", c.priority_class);
  line("tolerations_list", Join(c.tolerations, ","));
  line("node_affinity_dict", Join(affinity, ","));
  line("envs_dict", Join(env, ","));
  line("secret_name", c.secret_name);
  line("central_manager", c.central_manager);
  line("filter", FormatFilter(c.filter));
  line("mem_quantum_mib", std::to_string(c.mem_quantum_mib));
  line("disk_quantum_mib", std::to_string(c.disk_quantum_mib));
  line("cycle_interval_s", std::to_string(c.cycle_interval_s));
  line("idle_timeout_s", std::to_string(c.idle_timeout_s));
  line("max_submit_per_cycle", std::to_string(c.max_submit_per_cycle));
  line("max_pods_per_group", std::to_string(c.max_pods_per_group));
  line("max_total_pods", std::to_string(c.max_total_pods));
  line("completed_pod_ttl_s", std::to_string(c.completed_pod_ttl_s));
  return out;
}

}  // namespace kprov
