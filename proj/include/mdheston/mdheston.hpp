#ifndef MDHESTON_MDHESTON_HPP
#define MDHESTON_MDHESTON_HPP

#include "mdheston/black_scholes.hpp"
#include "mdheston/experiments.hpp"
#include "mdheston/fourier.hpp"
#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/mdp_rates.hpp"
#include "mdheston/monte_carlo.hpp"
#include "mdheston/quadrature.hpp"
#include "mdheston/roots.hpp"
#include "mdheston/sharp_expansion.hpp"
#include "mdheston/special_functions.hpp"

#endif  // MDHESTON_MDHESTON_HPP
