#include "atomsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace atomsim::io {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "tau,x,p,g1,g2,G1,G2,H,norm,u\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& s = traj.states[k];
        os << fmt17(traj.tau[k]) << ',' << fmt17(s.x) << ',' << fmt17(s.p) << ','
           << fmt17(s.g.real()) << ',' << fmt17(s.g.imag()) << ','
           << fmt17(s.G.real()) << ',' << fmt17(s.G.imag()) << ','
           << fmt17(traj.H[k]) << ',' << fmt17(traj.norm[k]) << ','
           << fmt17(traj.u[k]) << '\n';
    }
}

void write_portrait_csv(std::ostream& os, const Trajectory& traj, double tau_max) {
    os << "tau,g1,g2\n";
    for (std::size_t k = 0; k < traj.size() && traj.tau[k] <= tau_max + 1e-12; ++k)
        os << fmt17(traj.tau[k]) << ',' << fmt17(traj.states[k].g.real()) << ','
           << fmt17(traj.states[k].g.imag()) << '\n';
}

void write_chaosmap_csv(std::ostream& os, const ChaosMap& map) {
    os << "delta,p0,lambda,converged\n";
    for (std::size_t i = 0; i < map.delta_axis.size(); ++i)
        for (std::size_t j = 0; j < map.p0_axis.size(); ++j)
            os << fmt17(map.delta_axis[i]) << ',' << fmt17(map.p0_axis[j]) << ','
               << fmt17(map.lambda(i, j)) << ',' << (map.converged(i, j) ? 1 : 0)
               << '\n';
}

void write_chaosmap_matrix(std::ostream& os, const ChaosMap& map) {
    os << map.delta_axis.size();
    for (double d : map.delta_axis) os << ' ' << fmt17(d);
    os << '\n';
    for (std::size_t j = 0; j < map.p0_axis.size(); ++j) {
        os << fmt17(map.p0_axis[j]);
        for (std::size_t i = 0; i < map.delta_axis.size(); ++i)
            os << ' ' << fmt17(map.lambda(i, j));
        os << '\n';
    }
}

void write_ensemble_csv(std::ostream& os, const EnsembleResult& result) {
    os << "atom_id,x_final,p_final,g1,g2,G1,G2,norm\n";
    for (const auto& a : result.atoms) {
        if (!a.ok) continue;
        const auto& s = a.final_state;
        os << a.atom_id << ',' << fmt17(s.x) << ',' << fmt17(s.p) << ','
           << fmt17(s.g.real()) << ',' << fmt17(s.g.imag()) << ','
           << fmt17(s.G.real()) << ',' << fmt17(s.G.imag()) << ','
           << fmt17(a.final_norm) << '\n';
    }
}

void write_histogram_csv(std::ostream& os, const Histogram& hist) {
    os << "bin_left,count,density\n";
    for (std::size_t k = 0; k < hist.counts.size(); ++k)
        os << fmt17(hist.bin_left[k]) << ',' << hist.counts[k] << ','
           << fmt17(hist.density[k]) << '\n';
}

std::string matrix_to_json(const Eigen::MatrixXcd& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            entries.push_back({m(r, c).real(), m(r, c).imag()});
    nlohmann::json j{{"dim", m.rows()}, {"entries", std::move(entries)}};
    return j.dump();
}

} // namespace atomsim::io
