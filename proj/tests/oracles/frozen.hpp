#pragma once

// Generated by tests/oracles/generate.py. Do not edit.

namespace frozen {

// sigma(t) of the moment equations, mu = hbar = sigma0 = 1, b0 = 0.
struct MomentSample { double ratio, t, sigma, b; };
inline constexpr MomentSample kMoments[] = {
    {0.25, 0.25, 1.0903807092787987, 0.080041363118332862},
    {0.25, 0.5, 1.3309743134816274, 0.11167887238805349},
    {0.5, 0.5, 1.0612688431406059, 0.056634047948530275},
    {0.5, 1.0, 1.2329691613977309, 0.088781809007955792},
    {1.0, 1.0, 1, 0},
    {2.0, 0.5, 0.9921975399269658, -0.031415328419147778},
    {2.0, 1.0, 0.96890424332402936, -0.06388675614042183},
    {2.0, 2.0, 0.87704797896365727, -0.13850874157276089},
    {4.0, 0.5, 0.99416894059351202, -0.046696577178690704},
    {4.0, 1.0, 0.97700189484093847, -0.092431539600695528},
    {4.0, 2.0, 0.91250740737256841, -0.18010139275366002},
};

// Central-fringe visibility of the linear two-slit screen.
inline constexpr double kSlitVisibility = 0.89179314251092878;
inline constexpr double kSlitEnvelopeWidth = 5.6946514752389543;

}  // namespace frozen
