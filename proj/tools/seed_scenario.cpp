// Computes initial_q for a scenario file: starting from the optional "seed_q"
// posture (or the current initial_q), iterates the prioritized IK (RCM first,
// pose second) to the first path sample and writes the result back.
//
// usage: seed-scenario <scenario.json> [max_iter]

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "rcmik/rcmik.hpp"

int main(int argc, char** argv) {
  using namespace rcmik;
  if (argc < 2) {
    std::cerr << "usage: seed-scenario <scenario.json> [max_iter]\n";
    return 2;
  }
  const std::filesystem::path path = argv[1];
  const int max_iter = argc > 2 ? std::atoi(argv[2]) : 5000;
  try {
    auto doc = nlohmann::ordered_json::parse(read_text_file(path));
    const bench::ScenarioConfig c = bench::parse_scenario(read_text_file(path), path.parent_path());
    const KinematicChain chain = load_chain_file(c.chain_file);
    const Transform target = bench::path_point(c.path.t_at(0), c.path);
    const std::optional<Vector3> trocar = c.constrained ? c.trocar : std::nullopt;

    GainSet g = c.gains;
    g.Kr1 = 0.2;
    g.Kr2 = 0.2;
    VectorX q = c.initial_q;
    if (doc.contains("seed_q")) {
      const auto seed = doc.at("seed_q").get<std::vector<double>>();
      q = Eigen::Map<const VectorX>(seed.data(), static_cast<Eigen::Index>(seed.size()));
    }
    chain.check_size(q);
    HqpSolver solver;
    double e_pose = 0.0, e_rcm = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      const auto problem = build_surgical_problem(chain, q, target, trocar, g, 1.0, 1.0, false);
      q += solver.solve(problem.levels).qdot;
      e_pose = pose_error(forward_kinematics(chain, q, frame_names::kEndEffector), target).norm();
      e_rcm = trocar ? rcm_state(chain, q, *trocar).error() : 0.0;
      if (e_pose < 1e-13 && e_rcm < 1e-13) break;
    }
    std::fprintf(stderr, "pose error %.3e  rcm error %.3e  m %.5f\n", e_pose, e_rcm,
                 manipulability(chain, q, frame_names::kEndEffector));
    if (!chain.within_limits(q)) std::fprintf(stderr, "warning: seed leaves the joint limits\n");

    std::vector<double> qv(q.data(), q.data() + q.size());
    for (double& v : qv) v = std::round(v * 1e12) / 1e12;
    doc["initial_q"] = qv;
    std::string text = doc.dump(2) + "\n";
    bench::write_file_atomic(path, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
