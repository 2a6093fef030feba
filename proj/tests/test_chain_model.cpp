#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support/oracles.hpp"

namespace {

using namespace rcmik;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// SE(3)

TEST(Se3, IdentityLogIsZero) {
  EXPECT_EQ(se3_log(Transform::identity()).vector(), Vector6::Zero());
}

TEST(Se3, PureTranslationLog) {
  const Twist xi = se3_log(Transform::from_translation({0.1, 0, 0}));
  EXPECT_NEAR((xi.linear - Vector3(0.1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(xi.angular, Vector3::Zero());
}

TEST(Se3, QuarterTurnAboutZMatchesMatrixLog) {
  const Transform t{Eigen::AngleAxisd(kPi / 2, Vector3::UnitZ()).toRotationMatrix(), Vector3::Zero()};
  const Twist xi = se3_log(t);
  EXPECT_NEAR((xi.angular - Vector3(0, 0, kPi / 2)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(xi.linear.norm(), 0.0, 1e-12);
  EXPECT_NEAR((xi.vector() - oracle::matrix_log_twist(t)).norm(), 0.0, 1e-10);
}

TEST(Se3, TwistOrderingIsLinearThenAngular) {
  const Twist xi{{1, 2, 3}, {4, 5, 6}};
  const Vector6 v = xi.vector();
  EXPECT_EQ(v.head<3>(), Vector3(1, 2, 3));
  EXPECT_EQ(v.tail<3>(), Vector3(4, 5, 6));
  EXPECT_EQ(Twist::from_vector(v).vector(), v);
}

TEST(Se3, LogMatchesMatrixLogOnRandomPoses) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Transform t{oracle::random_rotation(rng, kPi - 0.1), Vector3(u(rng), u(rng), u(rng))};
    EXPECT_NEAR((se3_log(t).vector() - oracle::matrix_log_twist(t)).norm(), 0.0, 1e-9);
  }
}

TEST(Se3, ExpLogRoundTrip) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const Transform t{oracle::random_rotation(rng, kPi - 0.1), Vector3(u(rng), u(rng), u(rng))};
    const Transform back = se3_exp(se3_log(t));
    EXPECT_LE((back.matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Se3, SmallAngleBranchIsContinuous) {
  const Vector3 axis = Vector3(1, -2, 0.5).normalized();
  for (double angle : {1e-12, 1e-9, 0.99e-8, 1.01e-8, 1e-6}) {
    const Transform t{Eigen::AngleAxisd(angle, axis).toRotationMatrix(), Vector3(0.3, 0.1, -0.2)};
    const Twist xi = se3_log(t);
    EXPECT_NEAR((xi.angular - angle * axis).norm(), 0.0, 1e-15);
    EXPECT_LE((se3_exp(xi).matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Se3, AngleNearPiIsABranchError) {
  const Transform t{Eigen::AngleAxisd(kPi - 1e-9, Vector3::UnitX()).toRotationMatrix(), Vector3::Zero()};
  EXPECT_THROW(se3_log(t), BranchError);
  const Transform ok{Eigen::AngleAxisd(kPi - 1e-3, Vector3::UnitX()).toRotationMatrix(), Vector3::Zero()};
  EXPECT_NO_THROW(se3_log(ok));
}

TEST(Se3, RpyIsFixedAxisZYX) {
  const Vector3 rpy(0.3, -0.2, 1.1);
  const Matrix3 expected = Eigen::AngleAxisd(1.1, Vector3::UnitZ()).toRotationMatrix() *
                           Eigen::AngleAxisd(-0.2, Vector3::UnitY()).toRotationMatrix() *
                           Eigen::AngleAxisd(0.3, Vector3::UnitX()).toRotationMatrix();
  EXPECT_LE((rpy_to_rotation(rpy) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(orthonormality_defect(rpy_to_rotation(rpy)), 1e-14);
}

TEST(Se3, TransformComposeAndInverse) {
  std::mt19937 rng(13);
  const Transform a{oracle::random_rotation(rng), Vector3(0.1, 0.2, 0.3)};
  const Transform b{oracle::random_rotation(rng), Vector3(-0.4, 0.0, 0.5)};
  EXPECT_LE(((a * b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(((a * a.inverse()).matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

// ---------------------------------------------------------------------------
// Chain loading

const char* kOneJoint = R"({
  "name": "one",
  "joints": [{"type": "revolute", "axis": [0, 0, 1], "limit_lower": -3.141592653589793,
              "limit_upper": 3.141592653589793}],
  "frames": {"ee": {"parent": 0, "origin_xyz": [1, 0, 0]},
             "rcm_pre": {"parent": -1},
             "rcm_post": {"parent": 0, "origin_xyz": [0.5, 0, 0]}}
})";

TEST(LoadChain, MinimalChain) {
  const KinematicChain c = load_chain(kOneJoint);
  EXPECT_EQ(c.dof(), 1);
  EXPECT_EQ(c.name(), "one");
  EXPECT_TRUE(c.has_shaft());
}

TEST(LoadChain, ShippedChains) {
  const KinematicChain kc1 = oracle::shipped_chain("kc1_like");
  const KinematicChain kc2 = oracle::shipped_chain("kc2_like");
  EXPECT_EQ(kc1.dof(), 10);
  EXPECT_EQ(kc2.dof(), 12);
  for (const auto* c : {&kc1, &kc2}) {
    for (const char* f : {"ee", "rcm_pre", "rcm_post"}) EXPECT_TRUE(c->has_frame(f)) << f;
  }
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

TEST(LoadChain, RejectsUnnormalizedAxis) {
  EXPECT_THROW(load_chain(replace(kOneJoint, "[0, 0, 1]", "[1, 1, 0]")), ValidationError);
}

TEST(LoadChain, RejectsEmptyLimitRange) {
  EXPECT_THROW(load_chain(replace(kOneJoint, "-3.141592653589793", "3.141592653589793")),
               ValidationError);
}

TEST(LoadChain, RejectsMissingFrame) {
  EXPECT_THROW(load_chain(replace(kOneJoint, "\"rcm_pre\"", "\"tip\"")), ValidationError);
}

TEST(LoadChain, RejectsShaftFramesInWrongOrder) {
  const std::string swapped =
      replace(replace(kOneJoint, "\"rcm_pre\": {\"parent\": -1}", "\"rcm_pre\": {\"parent\": 0}"),
              "\"rcm_post\": {\"parent\": 0,", "\"rcm_post\": {\"parent\": -1,");
  EXPECT_THROW(load_chain(swapped), ValidationError);
}

TEST(LoadChain, MalformedDocumentIsAParseError) {
  EXPECT_THROW(load_chain("{\"name\": \"x\", \"joints\": ["), ParseError);
  EXPECT_THROW(load_chain(replace(kOneJoint, "\"revolute\"", "\"spherical\"")), ParseError);
  EXPECT_THROW(load_chain(R"({"name": "x"})"), ParseError);
}

TEST(LoadChain, MissingFileIsAParseError) {
  EXPECT_THROW(load_chain_file("/nonexistent/chain.json"), ParseError);
}

// ---------------------------------------------------------------------------
// Forward kinematics and Jacobians

TEST(ForwardKinematics, Planar2r) {
  const KinematicChain c = oracle::planar_2r();
  EXPECT_NEAR((forward_kinematics(c, VectorX::Zero(2), "ee").translation - Vector3(2, 0, 0)).norm(), 0, 1e-15);
  EXPECT_NEAR((forward_kinematics(c, Eigen::Vector2d(0, kPi / 2), "ee").translation - Vector3(1, 1, 0)).norm(),
              0, 1e-15);
  EXPECT_NEAR((forward_kinematics(c, Eigen::Vector2d(kPi / 2, 0), "ee").translation - Vector3(0, 2, 0)).norm(),
              0, 1e-15);
}

TEST(ForwardKinematics, ZeroConfigurationComposesFixedTransforms) {
  const KinematicChain c = oracle::shipped_chain("kc1_like");
  Transform expected;
  for (const auto& j : c.joints()) expected = expected * j.origin;
  const auto& ee = c.frame("ee");
  ASSERT_EQ(ee.parent, c.dof() - 1);
  expected = expected * ee.offset;
  const Transform t = forward_kinematics(c, VectorX::Zero(c.dof()), "ee");
  EXPECT_LE((t.matrix() - expected.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ForwardKinematics, ErrorsOnBadInput) {
  const KinematicChain c = oracle::planar_2r();
  EXPECT_THROW(forward_kinematics(c, VectorX::Zero(3), "ee"), DimensionError);
  EXPECT_THROW(forward_kinematics(c, VectorX::Zero(2), "nope"), ValidationError);
}

TEST(ForwardKinematics, IsDeterministic) {
  const KinematicChain c = oracle::shipped_chain("kc2_like");
  std::mt19937 rng(3);
  const VectorX q = oracle::random_config(c, rng);
  const Transform a = forward_kinematics(c, q, "ee");
  const Transform b = forward_kinematics(c, q, "ee");
  EXPECT_EQ(a.matrix(), b.matrix());
}

TEST(Jacobian, Planar2rAtZero) {
  const MatrixX j = geometric_jacobian(oracle::planar_2r(), VectorX::Zero(2), "ee").matrix;
  EXPECT_NEAR(j.row(0).norm(), 0.0, 1e-15);
  EXPECT_NEAR((j.row(1) - Eigen::RowVector2d(2, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((j.row(5) - Eigen::RowVector2d(1, 1)).norm(), 0.0, 1e-15);
}

TEST(Jacobian, PrismaticColumn) {
  Joint p{"slide", JointType::Prismatic, Vector3::UnitZ(), Transform::identity(), -1.0, 1.0};
  Joint r{"spin", JointType::Revolute, Vector3::UnitZ(), Transform::identity(), -1.0, 1.0};
  std::map<std::string, FrameAttachment> frames{{"ee", {1, Transform::from_translation({0.2, 0, 0})}},
                                                {"rcm_pre", {0, {}}},
                                                {"rcm_post", {1, {}}}};
  const KinematicChain c = KinematicChain::create("pr", {p, r}, frames);
  const MatrixX j = geometric_jacobian(c, Eigen::Vector2d(0.3, 0.4), "ee").matrix;
  Vector6 expected;
  expected << 0, 0, 1, 0, 0, 0;
  EXPECT_NEAR((j.col(0) - expected).norm(), 0.0, 1e-15);
}

TEST(Jacobian, MatchesFiniteDifferencesOnShippedChains) {
  std::mt19937 rng(21);
  for (const char* name : {"kc1_like", "kc2_like"}) {
    const KinematicChain c = oracle::shipped_chain(name);
    for (int k = 0; k < 50; ++k) {
      const VectorX q = oracle::random_config(c, rng);
      for (const char* frame : {"ee", "rcm_pre", "rcm_post"}) {
        const MatrixX j = geometric_jacobian(c, q, frame).matrix;
        EXPECT_LE((j - oracle::fd_jacobian(c, q, frame)).cwiseAbs().maxCoeff(), 1e-6)
            << name << " " << frame;
      }
    }
  }
}

TEST(Jacobian, PositionRowsAreTopRows) {
  const KinematicChain c = oracle::shipped_chain("kc1_like");
  std::mt19937 rng(22);
  const Jacobian j = geometric_jacobian(c, oracle::random_config(c, rng), "rcm_post");
  EXPECT_EQ(MatrixX(j.position_rows()), MatrixX(j.matrix.topRows(3)));
  EXPECT_EQ(j.cols(), c.dof());
}

int zero_columns(const MatrixX& j) {
  int n = 0;
  for (Eigen::Index i = 0; i < j.cols(); ++i) n += j.col(i).isZero(0.0) ? 1 : 0;
  return n;
}

TEST(Jacobian, DistalColumnsAreZero) {
  std::mt19937 rng(23);
  for (const char* name : {"kc1_like", "kc2_like"}) {
    const KinematicChain c = oracle::shipped_chain(name);
    const VectorX q = oracle::random_config(c, rng);
    const MatrixX pre = geometric_jacobian(c, q, "rcm_pre").matrix;
    const MatrixX ee = geometric_jacobian(c, q, "ee").matrix;
    EXPECT_GE(zero_columns(pre), zero_columns(ee) + 1) << name;
    for (int i = c.frame("rcm_pre").parent + 1; i < c.dof(); ++i) EXPECT_TRUE(pre.col(i).isZero(0.0));
  }
}

}  // namespace
