#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rcmik/errors.hpp"
#include "rcmik/se3.hpp"

namespace rcmik {

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

enum class JointType { Revolute, Prismatic };

struct Joint {
  std::string name;
  JointType type = JointType::Revolute;
  Vector3 axis = Vector3::UnitZ();  // in the joint frame
  Transform origin;                 // parent joint frame -> this joint frame at q = 0
  double lower = 0.0;
  double upper = 0.0;
};

/// A named point/frame rigidly attached to a joint frame (parent -1 is the base).
struct FrameAttachment {
  int parent = -1;
  Transform offset;
};

namespace frame_names {
inline constexpr const char* kEndEffector = "ee";
inline constexpr const char* kRcmPre = "rcm_pre";
inline constexpr const char* kRcmPost = "rcm_post";
}  // namespace frame_names

/// Immutable serial chain. Construct through KinematicChain::create or load_chain
/// so every invariant is checked once, up front.
class KinematicChain {
 public:
  static constexpr double kAxisTolerance = 1e-12;

  static KinematicChain create(std::string name, std::vector<Joint> joints,
                               std::map<std::string, FrameAttachment> frames) {
    KinematicChain chain;
    chain.name_ = std::move(name);
    chain.joints_ = std::move(joints);
    chain.frames_ = std::move(frames);
    chain.validate();
    return chain;
  }

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::map<std::string, FrameAttachment>& frames() const { return frames_; }

  bool has_frame(const std::string& frame) const { return frames_.count(frame) != 0; }

  const FrameAttachment& frame(const std::string& frame) const {
    const auto it = frames_.find(frame);
    if (it == frames_.end()) {
      throw ValidationError("unknown frame '" + frame + "' in chain '" + name_ + "'");
    }
    return it->second;
  }

  /// True when the chain carries the two shaft frames needed by the RCM task.
  bool has_shaft() const { return has_frame(frame_names::kRcmPre) && has_frame(frame_names::kRcmPost); }

  VectorX lower_limits() const {
    VectorX v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints_[i].lower;
    return v;
  }

  VectorX upper_limits() const {
    VectorX v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints_[i].upper;
    return v;
  }

  bool within_limits(const VectorX& q, double tol = 0.0) const {
    check_size(q);
    for (int i = 0; i < dof(); ++i) {
      if (q[i] < joints_[i].lower - tol || q[i] > joints_[i].upper + tol) return false;
    }
    return true;
  }

  void check_size(const VectorX& q) const {
    if (q.size() != dof()) {
      throw DimensionError("joint vector has " + std::to_string(q.size()) +
                           " entries, chain '" + name_ + "' has " + std::to_string(dof()) +
                           " joints");
    }
  }

 private:
  KinematicChain() = default;

  void validate() const {
    if (joints_.empty()) throw ValidationError("chain '" + name_ + "' has no joints");
    for (std::size_t i = 0; i < joints_.size(); ++i) {
      const Joint& j = joints_[i];
      const std::string where = "joint " + std::to_string(i) + " ('" + j.name + "')";
      if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > kAxisTolerance) {
        throw ValidationError(where + ": axis is not a unit vector");
      }
      if (!std::isfinite(j.lower) || !std::isfinite(j.upper) || !(j.lower < j.upper)) {
        throw ValidationError(where + ": requires limit_lower < limit_upper");
      }
      if (orthonormality_defect(j.origin.rotation) > 1e-10 || !j.origin.translation.allFinite()) {
        throw ValidationError(where + ": origin is not a rigid transform");
      }
    }
    for (const auto& [frame_name, attach] : frames_) {
      if (attach.parent < -1 || attach.parent >= dof()) {
        throw ValidationError("frame '" + frame_name + "': parent joint index " +
                              std::to_string(attach.parent) + " out of range");
      }
    }
    for (const char* required : {frame_names::kEndEffector, frame_names::kRcmPre,
                                 frame_names::kRcmPost}) {
      if (!has_frame(required)) {
        throw ValidationError("chain '" + name_ + "' is missing required frame '" +
                              required + "'");
      }
    }
    if (frame(frame_names::kRcmPre).parent >= frame(frame_names::kRcmPost).parent) {
      throw ValidationError("frame 'rcm_post' must be attached distal to 'rcm_pre'");
    }
  }

  std::string name_;
  std::vector<Joint> joints_;
  std::map<std::string, FrameAttachment> frames_;
};

namespace detail {

inline Vector3 json_vec3(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return Vector3::Zero();
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw ParseError(std::string("'") + key + "' must be an array of 3 numbers");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

inline Transform json_origin(const nlohmann::json& j) {
  return {rpy_to_rotation(json_vec3(j, "origin_rpy")), json_vec3(j, "origin_xyz")};
}

}  // namespace detail

/// Parses the JSON chain description and validates it.
///
/// Schema: {name, joints: [{name?, type, axis, origin_xyz, origin_rpy,
/// limit_lower, limit_upper}], frames: {name: {parent, origin_xyz, origin_rpy}}}.
inline KinematicChain load_chain(const std::string& document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("chain document: ") + e.what());
  }

  try {
    std::vector<Joint> joints;
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      joint.name = jj.value("name", "joint" + std::to_string(joints.size() + 1));
      const std::string type = jj.at("type").get<std::string>();
      if (type == "revolute") {
        joint.type = JointType::Revolute;
      } else if (type == "prismatic") {
        joint.type = JointType::Prismatic;
      } else {
        throw ParseError("joint '" + joint.name + "': unknown type '" + type + "'");
      }
      if (!jj.contains("axis")) throw ParseError("joint '" + joint.name + "': missing 'axis'");
      joint.axis = detail::json_vec3(jj, "axis");
      joint.origin = detail::json_origin(jj);
      joint.lower = jj.at("limit_lower").get<double>();
      joint.upper = jj.at("limit_upper").get<double>();
      joints.push_back(std::move(joint));
    }

    std::map<std::string, FrameAttachment> frames;
    if (j.contains("frames")) {
      for (const auto& [frame_name, fj] : j.at("frames").items()) {
        frames[frame_name] = {fj.at("parent").get<int>(), detail::json_origin(fj)};
      }
    }
    return KinematicChain::create(j.at("name").get<std::string>(), std::move(joints),
                                  std::move(frames));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("chain document: ") + e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline KinematicChain load_chain_file(const std::filesystem::path& path) {
  return load_chain(read_text_file(path));
}

}  // namespace rcmik
