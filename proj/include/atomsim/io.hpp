#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "atomsim/dynamics.hpp"
#include "atomsim/ensemble.hpp"
#include "atomsim/lyapunov.hpp"
#include "atomsim/regimes.hpp"

namespace atomsim::io {

/// Shortest round-trippable decimal form (17 significant digits).
std::string fmt17(double v);

/// FNV-1a 64-bit, used to fingerprint effective configurations.
std::uint64_t fnv1a64(const std::string& s);

// CSV writers. Every floating-point field uses fmt17.

/// Header: tau,x,p,g1,g2,G1,G2,H,norm,u
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Header: tau,g1,g2  (samples with tau <= max mark)
void write_portrait_csv(std::ostream& os, const Trajectory& traj, double tau_max);

/// Long format, header: delta,p0,lambda,converged
void write_chaosmap_csv(std::ostream& os, const ChaosMap& map);

/// Gnuplot nonuniform-matrix format (x = delta, y = p0).
void write_chaosmap_matrix(std::ostream& os, const ChaosMap& map);

/// Header: atom_id,x_final,p_final,g1,g2,G1,G2,norm  (failed atoms excluded)
void write_ensemble_csv(std::ostream& os, const EnsembleResult& result);

/// Header: bin_left,count,density
void write_histogram_csv(std::ostream& os, const Histogram& hist);

/// Representation matrix as {"dim": n, "entries": [[re, im], ...]} with the
/// entries flattened in row-major order.
std::string matrix_to_json(const Eigen::MatrixXcd& m);

} // namespace atomsim::io
