#pragma once

#include <Eigen/Core>

#include <array>
#include <string_view>

namespace gridsyn {

inline constexpr int kNx = 23;
inline constexpr int kNu = 7;
inline constexpr int kNz = 4;
inline constexpr int kNw = 4;
inline constexpr int kNy = 2;
inline constexpr int kNv = kNx + kNu + kNw + kNy;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using StateVec = Eigen::Matrix<double, kNx, 1>;
using InputVec = Eigen::Matrix<double, kNu, 1>;
using IntVec = Eigen::Matrix<int, kNz, 1>;
using DistVec = Eigen::Matrix<double, kNw, 1>;
using OutputVec = Eigen::Matrix<double, kNy, 1>;

// Zero-based positions, named after the symbols they hold.
namespace sx {
enum : int {
    I_f, G_H2, p_O2, p_H2O, p_H2, P_mtf, t_abf, t_abw, t_abt, t_c, t_cs, t_cwm,
    t_e, t_es, t_ewm, v_cap, C_soc, I_ba, C_sot, C_stc, C_sth, t_re, t_br
};
}
namespace su {
enum : int { G_ff, G_fm, G_ab, N_ec, G_ec, G_stu, P_bar };
}
namespace sz {
enum : int { fc, ma, ec, st };
}
namespace sw {
enum : int { t_a, S_ra, P_d, Q_o };
}
namespace sy {
enum : int { P_sl, t_br };
}

inline constexpr std::array<std::string_view, kNx> kStateSymbols = {
    "I_f",   "G_H2", "p_O2",  "p_H2O", "p_H2",  "P_mtf", "t_abf", "t_abw",
    "t_abt", "t_c",  "t_cs",  "t_cwm", "t_e",   "t_es",  "t_ewm", "v_cap",
    "C_soc", "I_ba", "C_sot", "C_stc", "C_sth", "t_re",  "t_br"};
inline constexpr std::array<std::string_view, kNu> kInputSymbols = {
    "G_ff", "G_fm", "G_ab", "N_ec", "G_ec", "G_stu", "P_bar"};
inline constexpr std::array<std::string_view, kNz> kIntSymbols = {"z_fc", "z_ma", "z_ec", "z_st"};
inline constexpr std::array<std::string_view, kNw> kDistSymbols = {"t_a", "S_ra", "P_d", "Q_o"};
inline constexpr std::array<std::string_view, kNy> kOutputSymbols = {"P_sl", "t_br"};

}  // namespace gridsyn
