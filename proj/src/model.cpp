#include "nmbc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "nmbc/errors.hpp"

namespace nmbc {

using nlohmann::json;

void MtuParams::validate(const std::string& who) const {
  auto fail = [&](const std::string& what) { throw ParseError(who + ": " + what); };
  if (!(shape_factor_E >= -3.0 && shape_factor_E < 0.0)) {
    fail("shape_factor_E must be in [-3, 0), got " + std::to_string(shape_factor_E));
  }
  if (!(f_max_iso > 0.0)) fail("f_max_iso must be positive");
  if (!(l_opt > 0.0)) fail("l_opt must be positive");
  if (!(l_slack > 0.0)) fail("l_slack must be positive");
  if (!(alpha_opt >= 0.0 && alpha_opt < std::numbers::pi / 2.0)) {
    fail("alpha_opt must be in [0, pi/2)");
  }
  if (!(damping_dm >= 0.0)) fail("damping_dm must be non-negative");
}

Eigen::Index ModelDef::joint_index(const std::string& jname) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].name == jname) return static_cast<Eigen::Index>(i);
  }
  throw ParseError("unknown joint '" + jname + "'");
}

const MtuDef* ModelDef::find_mtu(const std::string& mname) const {
  for (const auto& m : mtus) {
    if (m.name == mname) return &m;
  }
  return nullptr;
}

const GeometrySurrogate& ModelDef::surrogate(const std::string& mtu) const {
  const auto it = geometry.find(mtu);
  if (it == geometry.end()) throw ParseError("no geometry surrogate for MTU '" + mtu + "'");
  return it->second;
}

void ModelDef::validate() const {
  if (joints.empty()) throw ParseError("model has no joints");
  if (mtus.empty()) throw ParseError("model has no MTUs");

  std::set<std::string> joint_names;
  for (const auto& j : joints) {
    if (!(j.angle_min < j.angle_max)) {
      throw ParseError("joint '" + j.name + "': angle_range min must be < max");
    }
    if (!joint_names.insert(j.name).second) {
      throw ParseError("duplicate joint name '" + j.name + "'");
    }
  }

  std::set<std::string> mtu_names;
  for (const auto& m : mtus) {
    if (!mtu_names.insert(m.name).second) {
      throw ParseError("duplicate MTU name '" + m.name + "'");
    }
    if (m.spanned_joints.empty()) {
      throw ParseError("MTU '" + m.name + "' spans no joints");
    }
    for (const auto& j : m.spanned_joints) {
      if (!joint_names.count(j)) {
        throw ParseError("MTU '" + m.name + "' references unknown joint '" + j + "'");
      }
    }
    m.params.validate("MTU '" + m.name + "'");
    if (!m.emg_channel.empty() && !mvc.count(m.emg_channel)) {
      throw ParseError("MTU '" + m.name + "': EMG channel '" + m.emg_channel +
                       "' has no MVC entry");
    }

    const auto git = geometry.find(m.name);
    if (git == geometry.end()) {
      throw ParseError("MTU '" + m.name + "' has no geometry surrogate");
    }
    const auto& surr = git->second;
    if (surr.dofs() != m.spanned_joints) {
      throw ParseError("MTU '" + m.name + "': geometry DOFs do not match spanned joints");
    }
    for (std::size_t d = 0; d < surr.dof_count(); ++d) {
      const auto [lo, hi] = surr.domain(d);
      const auto& j = joints[static_cast<std::size_t>(joint_index(m.spanned_joints[d]))];
      if (lo > j.angle_min + 1e-12 || hi < j.angle_max - 1e-12) {
        throw ParseError("MTU '" + m.name + "': geometry grid does not cover joint '" +
                         j.name + "' range");
      }
    }
  }

  for (const auto& [channel, v] : mvc) {
    if (!(v > 0.0)) throw ParseError("MVC for channel '" + channel + "' must be positive");
  }
}

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

double require_num(const json& j, const char* key, const std::string& ctx) {
  const auto& v = require(j, key, ctx);
  if (!v.is_number()) throw ParseError(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

ModelDef load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path.string());

  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  const std::string ctx = path.filename().string();
  if (require_num(j, "schema_version", ctx) != 1) {
    throw ParseError(ctx + ": unsupported schema_version (want 1)");
  }

  ModelDef model;
  model.name = j.value("name", "");

  for (const auto& jj : require(j, "joints", ctx)) {
    JointDef def;
    def.name = require(jj, "name", ctx + ": joint").get<std::string>();
    const auto& range = require(jj, "angle_range_rad", ctx + ": joint '" + def.name + "'");
    if (!range.is_array() || range.size() != 2) {
      throw ParseError(ctx + ": joint '" + def.name + "': angle_range_rad must be [min, max]");
    }
    def.angle_min = range[0].get<double>();
    def.angle_max = range[1].get<double>();
    model.joints.push_back(std::move(def));
  }

  if (j.contains("mvc")) {
    for (const auto& [channel, v] : j.at("mvc").items()) {
      model.mvc[channel] = v.get<double>();
    }
  }

  for (const auto& jm : require(j, "mtus", ctx)) {
    MtuDef def;
    def.name = require(jm, "name", ctx + ": mtu").get<std::string>();
    const std::string mctx = ctx + ": MTU '" + def.name + "'";
    for (const auto& s : require(jm, "spanned_joints", mctx)) {
      def.spanned_joints.push_back(s.get<std::string>());
    }
    if (jm.contains("emg_channel") && !jm.at("emg_channel").is_null()) {
      const auto ch = jm.at("emg_channel").get<std::string>();
      if (ch != "none") def.emg_channel = ch;
    }
    const auto& jp = require(jm, "params", mctx);
    def.params.shape_factor_E = require_num(jp, "shape_factor_E", mctx);
    def.params.f_max_iso = require_num(jp, "f_max_iso", mctx);
    def.params.l_opt = require_num(jp, "l_opt", mctx);
    def.params.l_slack = require_num(jp, "l_slack", mctx);
    def.params.alpha_opt = require_num(jp, "alpha_opt", mctx);
    def.params.damping_dm = jp.value("damping_dm", 0.1);
    def.grid_path = require(jm, "geometry", mctx).get<std::string>();

    const auto grid_file = path.parent_path() / def.grid_path;
    def.grid_abs = std::filesystem::absolute(grid_file);
    GeometryGrid grid = load_geometry_grid(grid_file, def.name);
    if (grid.dofs != def.spanned_joints) {
      throw ParseError(mctx + ": geometry grid DOFs " + grid_file.string() +
                       " do not match spanned_joints");
    }
    model.geometry.emplace(def.name, GeometrySurrogate::fit(grid));
    model.mtus.push_back(std::move(def));
  }

  model.validate();
  return model;
}

void save_model(const ModelDef& model, const std::filesystem::path& path) {
  json j;
  j["schema_version"] = 1;
  if (!model.name.empty()) j["name"] = model.name;
  j["joints"] = json::array();
  for (const auto& joint : model.joints) {
    j["joints"].push_back(
        {{"name", joint.name}, {"angle_range_rad", {joint.angle_min, joint.angle_max}}});
  }
  j["mvc"] = json::object();
  for (const auto& [channel, v] : model.mvc) j["mvc"][channel] = v;
  j["mtus"] = json::array();
  for (const auto& m : model.mtus) {
    if (m.grid_path.empty()) {
      throw ParseError("MTU '" + m.name + "' has no geometry grid path; cannot save");
    }
    // Keep grid references valid when saving into a different directory.
    std::string grid_ref = m.grid_path;
    if (!m.grid_abs.empty()) {
      std::error_code ec;
      const auto rel = std::filesystem::relative(
          m.grid_abs, std::filesystem::absolute(path).parent_path(), ec);
      grid_ref = ec || rel.empty() ? m.grid_abs.string() : rel.string();
    }
    j["mtus"].push_back({{"name", m.name},
                         {"spanned_joints", m.spanned_joints},
                         {"emg_channel", m.emg_channel.empty() ? "none" : m.emg_channel},
                         {"params",
                          {{"shape_factor_E", m.params.shape_factor_E},
                           {"f_max_iso", m.params.f_max_iso},
                           {"l_opt", m.params.l_opt},
                           {"l_slack", m.params.l_slack},
                           {"alpha_opt", m.params.alpha_opt},
                           {"damping_dm", m.params.damping_dm}}},
                         {"geometry", grid_ref}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write model file: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace nmbc
