#include "scene_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "noisecollage/error.hpp"

namespace noisecollage::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kSchema, path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      schema_error(path + "." + key, "unknown field");
    }
  }
}

const json& required(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "expected a finite number");
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    schema_error(path, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

RegionSpec parse_region(const json& j, const std::string& path) {
  check_keys(j, path, {"box", "polygon"});
  if (j.size() != 1) schema_error(path, "expected exactly one of 'box' or 'polygon'");
  if (j.contains("box")) {
    const auto v = get_numbers(j["box"], path + ".box");
    if (v.size() != 4) schema_error(path + ".box", "expected [x0, y0, x1, y1]");
    return Box{v[0], v[1], v[2], v[3]};
  }
  const json& poly = j["polygon"];
  const std::string ppath = path + ".polygon";
  if (!poly.is_array()) schema_error(ppath, "expected an array of [x, y] points");
  Polygon out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto p = get_numbers(poly[i], ppath + "[" + std::to_string(i) + "]");
    if (p.size() != 2) schema_error(ppath + "[" + std::to_string(i) + "]", "expected [x, y]");
    out.vertices.push_back({p[0], p[1]});
  }
  if (out.vertices.size() < 3) schema_error(ppath, "a polygon needs at least 3 vertices");
  return out;
}

ConditionFile parse_condition(const json& j, const std::string& path) {
  check_keys(j, path, {"analytic", "tokens", "empty"});
  if (j.size() != 1) schema_error(path, "expected exactly one of 'analytic', 'tokens' or 'empty'");
  ConditionFile c;
  if (j.contains("empty")) {
    check_keys(j["empty"], path + ".empty", {});
    c.kind = ConditionFile::Kind::kEmpty;
  } else if (j.contains("tokens")) {
    const json& t = j["tokens"];
    if (!t.is_array()) schema_error(path + ".tokens", "expected an array of token ids");
    c.kind = ConditionFile::Kind::kTokens;
    for (std::size_t i = 0; i < t.size(); ++i)
      c.tokens.push_back(get_unsigned(t[i], path + ".tokens[" + std::to_string(i) + "]"));
  } else {
    const json& a = j["analytic"];
    const std::string apath = path + ".analytic";
    check_keys(a, apath, {"mean", "sigma"});
    c.kind = ConditionFile::Kind::kAnalytic;
    c.mean = get_numbers(required(a, "mean", apath), apath + ".mean");
    c.sigma = get_number(required(a, "sigma", apath), apath + ".sigma");
  }
  return c;
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ordered_json region_to_json(const RegionSpec& r) {
  ordered_json out;
  if (const auto* b = std::get_if<Box>(&r)) {
    out["box"] = {b->x0, b->y0, b->x1, b->y1};
  } else {
    ordered_json pts = ordered_json::array();
    for (const auto& p : std::get<Polygon>(r).vertices) pts.push_back({p.x, p.y});
    out["polygon"] = pts;
  }
  return out;
}

ordered_json condition_to_json(const ConditionFile& c) {
  ordered_json out;
  switch (c.kind) {
    case ConditionFile::Kind::kEmpty: out["empty"] = ordered_json::object(); break;
    case ConditionFile::Kind::kTokens: out["tokens"] = c.tokens; break;
    case ConditionFile::Kind::kAnalytic:
      out["analytic"] = ordered_json{{"mean", c.mean}, {"sigma", c.sigma}};
      break;
  }
  return out;
}

Condition to_condition(const ConditionFile& c, std::size_t channels, CanvasSize canvas, const std::string& path) {
  switch (c.kind) {
    case ConditionFile::Kind::kEmpty: return EmptyCondition{};
    case ConditionFile::Kind::kTokens: return TokenCondition{c.tokens};
    case ConditionFile::Kind::kAnalytic:
      if (c.mean.size() != channels) {
        throw Error(ErrorKind::kConfig, path + ".analytic.mean has " + std::to_string(c.mean.size()) +
                                            " entries for " + std::to_string(channels) + " channels");
      }
      if (!(c.sigma >= 0.0)) throw Error(ErrorKind::kConfig, path + ".analytic.sigma must be >= 0");
      return AnalyticCondition::uniform(c.mean, c.sigma, canvas);
  }
  return EmptyCondition{};
}

}  // namespace

SceneFile parse_scene(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::kSchema, "malformed JSON at line " + std::to_string(line) + ", column " +
                                        std::to_string(col) + ": " + e.what());
  }
  const std::string top = "scene";
  check_keys(root, top, {"canvas", "objects", "global", "sampler"});

  SceneFile s;
  const json& canvas = required(root, "canvas", top);
  check_keys(canvas, "canvas", {"channels", "height", "width"});
  s.channels = get_unsigned(required(canvas, "channels", "canvas"), "canvas.channels");
  s.height = get_unsigned(required(canvas, "height", "canvas"), "canvas.height");
  s.width = get_unsigned(required(canvas, "width", "canvas"), "canvas.width");

  if (root.contains("objects")) {
    const json& objs = root["objects"];
    if (!objs.is_array()) schema_error("objects", "expected an array");
    for (std::size_t n = 0; n < objs.size(); ++n) {
      const std::string path = "objects[" + std::to_string(n) + "]";
      check_keys(objs[n], path, {"region", "condition", "hint"});
      ObjectFile o;
      o.region = parse_region(required(objs[n], "region", path), path + ".region");
      o.condition = parse_condition(required(objs[n], "condition", path), path + ".condition");
      if (objs[n].contains("hint")) {
        const json& h = objs[n]["hint"];
        const std::string hpath = path + ".hint";
        check_keys(h, hpath, {"target", "region"});
        o.hint = HintFile{get_numbers(required(h, "target", hpath), hpath + ".target"),
                          parse_region(required(h, "region", hpath), hpath + ".region")};
      }
      s.objects.push_back(std::move(o));
    }
  }

  if (root.contains("global")) {
    check_keys(root["global"], "global", {"condition"});
    s.global = parse_condition(required(root["global"], "condition", "global"), "global.condition");
  }

  if (root.contains("sampler")) {
    const json& sm = root["sampler"];
    check_keys(sm, "sampler", {"alpha", "steps", "guidance", "kind", "seed", "backend", "workers"});
    if (sm.contains("alpha")) s.sampler.alpha = get_number(sm["alpha"], "sampler.alpha");
    if (sm.contains("steps")) s.sampler.steps = get_unsigned(sm["steps"], "sampler.steps");
    if (sm.contains("guidance")) s.sampler.guidance = get_number(sm["guidance"], "sampler.guidance");
    if (sm.contains("kind")) s.sampler.kind = get_string(sm["kind"], "sampler.kind");
    if (sm.contains("seed")) s.sampler.seed = get_unsigned(sm["seed"], "sampler.seed");
    if (sm.contains("backend")) s.sampler.backend = get_string(sm["backend"], "sampler.backend");
    if (sm.contains("workers")) s.sampler.workers = get_unsigned(sm["workers"], "sampler.workers");
  }
  return s;
}

SceneFile load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read scene file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scene(text.str());
}

ordered_json scene_to_json(const SceneFile& s) {
  ordered_json root;
  root["canvas"] = ordered_json{{"channels", s.channels}, {"height", s.height}, {"width", s.width}};
  ordered_json objs = ordered_json::array();
  for (const auto& o : s.objects) {
    ordered_json jo;
    jo["region"] = region_to_json(o.region);
    jo["condition"] = condition_to_json(o.condition);
    if (o.hint) jo["hint"] = ordered_json{{"target", o.hint->target}, {"region", region_to_json(o.hint->region)}};
    objs.push_back(std::move(jo));
  }
  root["objects"] = std::move(objs);
  root["global"] = ordered_json{{"condition", condition_to_json(s.global)}};
  root["sampler"] = ordered_json{{"alpha", s.sampler.alpha},       {"steps", s.sampler.steps},
                                 {"guidance", s.sampler.guidance}, {"kind", s.sampler.kind},
                                 {"seed", s.sampler.seed},         {"backend", s.sampler.backend},
                                 {"workers", s.sampler.workers}};
  return root;
}

SceneSpec to_scene_spec(const SceneFile& f) {
  SceneSpec spec;
  spec.channels = f.channels;
  spec.canvas = {f.height, f.width};
  if (f.channels == 0 || f.height == 0 || f.width == 0) throw Error(ErrorKind::kConfig, "canvas extents must be positive");
  if (f.channels != 1 && f.channels != 3) {
    throw Error(ErrorKind::kConfig, "canvas.channels must be 1 (PGM) or 3 (PPM)");
  }
  for (std::size_t n = 0; n < f.objects.size(); ++n) {
    const ObjectFile& o = f.objects[n];
    const std::string path = "objects[" + std::to_string(n) + "]";
    SceneObject obj{o.region, to_condition(o.condition, f.channels, spec.canvas, path + ".condition"), std::nullopt};
    if (o.hint) {
      if (o.hint->target.size() != f.channels) {
        throw Error(ErrorKind::kConfig, path + ".hint.target needs one value per channel");
      }
      Mask active;
      try {
        active = rasterize(o.hint->region, spec.canvas);
      } catch (const Error& e) {
        throw Error(e.kind(), path + ".hint.region: " + e.what());
      }
      HintMap hint{Tensor({f.channels, f.height, f.width}), active};
      const std::size_t plane = f.height * f.width;
      for (std::size_t c = 0; c < f.channels; ++c)
        for (std::size_t p = 0; p < plane; ++p)
          if (active.at_index(p)) hint.values[c * plane + p] = o.hint->target[c];
      obj.hint = std::move(hint);
    }
    spec.objects.push_back(std::move(obj));
  }
  spec.global_condition = to_condition(f.global, f.channels, spec.canvas, "global.condition");
  spec.sampler.merge.alpha = f.sampler.alpha;
  spec.sampler.steps = f.sampler.steps;
  spec.sampler.guidance.scale = f.sampler.guidance;
  try {
    spec.sampler.kind = parse_step_kind(f.sampler.kind);
    spec.sampler.backend = parse_backend(f.sampler.backend);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("sampler: ") + e.what());
  }
  spec.sampler.seed = f.sampler.seed;
  spec.sampler.workers = f.sampler.workers;
  return spec;
}

DisplayMapping display_mapping(const SceneFile& s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto include = [&](const std::vector<double>& means, double sigma) {
    for (double m : means) {
      lo = std::min(lo, m - 3.0 * sigma);
      hi = std::max(hi, m + 3.0 * sigma);
    }
  };
  auto include_condition = [&](const ConditionFile& c) {
    if (c.kind == ConditionFile::Kind::kAnalytic) include(c.mean, c.sigma);
    else include({0.0}, 1.0);
  };
  include_condition(s.global);
  for (const auto& o : s.objects) {
    include_condition(o.condition);
    if (o.hint) include(o.hint->target, o.condition.kind == ConditionFile::Kind::kAnalytic ? o.condition.sigma : 1.0);
  }
  if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
  return {lo, hi};
}

}  // namespace noisecollage::cli
