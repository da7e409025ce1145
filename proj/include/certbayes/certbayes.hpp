#pragma once

#include <certbayes/adversarial_loss.hpp>
#include <certbayes/certificates.hpp>
#include <certbayes/data.hpp>
#include <certbayes/errors.hpp>
#include <certbayes/exponential_family.hpp>
#include <certbayes/hmc.hpp>
#include <certbayes/model.hpp>
#include <certbayes/numerics.hpp>
#include <certbayes/posterior.hpp>
#include <certbayes/risk.hpp>
