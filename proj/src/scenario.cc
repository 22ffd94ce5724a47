#include "kprov/scenario.h"

#include <fstream>
#include <set>
#include <sstream>

#include "kprov/errors.h"
#include "kprov/json_io.h"

namespace kprov {

namespace {

SimTime TimeField(const JsonReader& in, const std::string& key, SimTime horizon) {
  JsonReader field = in.Field(key);
  SimTime t = field.Int();
  if (t < 0 || t > horizon) field.Fail("time must lie within [0, horizon_s]");
  return t;
}

int64_t PositiveCount(const JsonReader& in) {
  JsonReader field = in.Field("count");
  int64_t n = field.Int();
  if (n <= 0) field.Fail("count must be > 0");
  return n;
}

std::vector<std::string> StringList(const JsonReader& in) {
  std::vector<std::string> out;
  for (size_t i = 0; i < in.Size(); ++i) out.push_back(in.Index(i).String());
  return out;
}

NodeShape ShapeFromJson(const JsonReader& in) {
  in.ExpectObject({"name", "capacity", "labels", "taints", "boot_delay_s"});
  NodeShape shape;
  shape.name = in.Field("name").String();
  if (shape.name.empty()) in.Field("name").Fail("must not be empty");
  shape.capacity = ResourcesFromJson(in.Field("capacity"));
  if (shape.capacity.IsZero()) in.Field("capacity").Fail("must be positive in some field");
  if (in.Has("labels")) shape.labels = AttributesFromJson(in.Field("labels"));
  if (in.Has("taints")) shape.taints = StringList(in.Field("taints"));
  if (in.Has("boot_delay_s")) shape.boot_delay = in.Field("boot_delay_s").NonNegativeInt();
  return shape;
}

DurationSpec DurationFromJson(const JsonReader& in) {
  if (in.value().is_object()) {
    in.ExpectObject({"min", "max"});
    DurationSpec d{in.Field("min").NonNegativeInt(), in.Field("max").NonNegativeInt()};
    if (d.min > d.max) in.Fail("min must be <= max");
    return d;
  }
  SimTime fixed = in.NonNegativeInt();
  return {fixed, fixed};
}

ProvisionerConfig ConfigFromText(const JsonReader& at, const std::string& text) {
  try {
    return ParseIni(text);
  } catch (const Error& e) {
    at.Fail(std::string("invalid provisioner config: ") + e.what());
  }
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario LoadScenario(std::string_view text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("<root>", std::string("malformed JSON: ") + e.what());
  }
  JsonReader root(doc, "");
  root.ExpectObject({"name", "seed", "horizon_s", "metrics_interval_s", "negotiator_interval_s",
                     "scheduler_interval_s", "unschedulable_timeout_s", "shapes",
                     "initial_nodes", "workload", "service_pods", "spot_kills",
                     "random_spot_kills", "autoscaler", "config", "config_path"});

  Scenario s;
  s.name = root.Field("name").String();
  s.seed = static_cast<uint64_t>(root.Field("seed").NonNegativeInt());
  s.horizon_s = root.Field("horizon_s").NonNegativeInt();
  for (auto [key, field] : {std::pair{"metrics_interval_s", &s.metrics_interval_s},
                            std::pair{"negotiator_interval_s", &s.negotiator_interval_s},
                            std::pair{"scheduler_interval_s", &s.scheduler_interval_s}}) {
    if (!root.Has(key)) continue;
    *field = root.Field(key).Int();
    if (*field <= 0) root.Field(key).Fail("interval must be > 0");
  }
  if (root.Has("unschedulable_timeout_s")) {
    s.unschedulable_timeout_s = root.Field("unschedulable_timeout_s").NonNegativeInt();
  }

  JsonReader shapes = root.Field("shapes");
  std::set<std::string> shape_names;
  for (size_t i = 0; i < shapes.Size(); ++i) {
    s.shapes.push_back(ShapeFromJson(shapes.Index(i)));
    if (!shape_names.insert(s.shapes.back().name).second) {
      shapes.Index(i).Field("name").Fail("duplicate shape name");
    }
  }

  if (root.Has("initial_nodes")) {
    JsonReader list = root.Field("initial_nodes");
    for (size_t i = 0; i < list.Size(); ++i) {
      JsonReader e = list.Index(i);
      e.ExpectObject({"shape", "count", "spot"});
      InitialNodes nodes{e.Field("shape").String(), PositiveCount(e), e.BoolOr("spot", false)};
      if (!shape_names.contains(nodes.shape)) e.Field("shape").Fail("unknown shape");
      s.initial_nodes.push_back(nodes);
    }
  }

  if (root.Has("workload")) {
    JsonReader list = root.Field("workload");
    for (size_t i = 0; i < list.Size(); ++i) {
      JsonReader e = list.Index(i);
      e.ExpectObject({"time", "count", "request", "attributes", "requirements", "duration_s"});
      WorkloadEntry w;
      w.time = TimeField(e, "time", s.horizon_s);
      w.count = PositiveCount(e);
      w.request = ResourcesFromJson(e.Field("request"));
      if (e.Has("attributes")) w.attributes = AttributesFromJson(e.Field("attributes"));
      if (e.Has("requirements")) {
        try {
          w.requirements = ParseFilter(e.Field("requirements").String());
        } catch (const FilterSyntax& err) {
          e.Field("requirements").Fail(err.what());
        }
      }
      w.duration = DurationFromJson(e.Field("duration_s"));
      s.workload.push_back(std::move(w));
    }
  }

  if (root.Has("service_pods")) {
    JsonReader list = root.Field("service_pods");
    for (size_t i = 0; i < list.Size(); ++i) {
      JsonReader e = list.Index(i);
      e.ExpectObject({"time", "count", "request", "priority", "duration_s", "tolerations"});
      ServicePodEntry p;
      p.time = TimeField(e, "time", s.horizon_s);
      p.count = PositiveCount(e);
      p.request = ResourcesFromJson(e.Field("request"));
      p.priority = e.Field("priority").Int();
      p.duration_s = e.Field("duration_s").NonNegativeInt();
      if (e.Has("tolerations")) p.tolerations = StringList(e.Field("tolerations"));
      s.service_pods.push_back(std::move(p));
    }
  }

  if (root.Has("spot_kills")) {
    JsonReader list = root.Field("spot_kills");
    for (size_t i = 0; i < list.Size(); ++i) {
      JsonReader e = list.Index(i);
      e.ExpectObject({"time", "node"});
      s.spot_kills.push_back({TimeField(e, "time", s.horizon_s), e.StringOr("node", kRandomNode)});
    }
  }

  if (root.Has("random_spot_kills")) {
    JsonReader e = root.Field("random_spot_kills");
    e.ExpectObject({"count", "start", "end"});
    s.random_spot_kills.count = e.Field("count").NonNegativeInt();
    s.random_spot_kills.start = TimeField(e, "start", s.horizon_s);
    s.random_spot_kills.end = TimeField(e, "end", s.horizon_s);
    if (s.random_spot_kills.start > s.random_spot_kills.end) e.Field("end").Fail("end < start");
  }

  if (root.Has("autoscaler")) {
    JsonReader e = root.Field("autoscaler");
    e.ExpectObject({"enabled", "provision_delay_s", "scale_down_idle_s", "max_nodes", "spot"});
    AutoscalerParams& a = s.autoscaler;
    a.enabled = e.BoolOr("enabled", true);
    if (e.Has("provision_delay_s")) a.provision_delay_s = e.Field("provision_delay_s").NonNegativeInt();
    if (e.Has("scale_down_idle_s")) a.scale_down_idle_s = e.Field("scale_down_idle_s").NonNegativeInt();
    if (e.Has("max_nodes")) a.max_nodes = e.Field("max_nodes").NonNegativeInt();
    a.spot = e.BoolOr("spot", false);
  }

  if (root.Has("config") && root.Has("config_path")) {
    root.Field("config_path").Fail("give either config or config_path, not both");
  }
  if (root.Has("config")) {
    s.config = ConfigFromText(root.Field("config"), root.Field("config").String());
  } else if (root.Has("config_path")) {
    JsonReader at = root.Field("config_path");
    std::string text;
    try {
      text = ReadFile(base_dir / at.String());
    } catch (const std::runtime_error& e) {
      at.Fail(e.what());
    }
    s.config = ConfigFromText(at, text);
  }
  return s;
}

Scenario LoadScenarioFile(const std::filesystem::path& path) {
  return LoadScenario(ReadFile(path), path.parent_path());
}

}  // namespace kprov
