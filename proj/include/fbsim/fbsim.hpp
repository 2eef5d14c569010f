#pragma once

#include "fbsim/config_space.hpp"
#include "fbsim/dependency_checker.hpp"
#include "fbsim/detectors.hpp"
#include "fbsim/fbs_pipeline.hpp"
#include "fbsim/phy_artifacts.hpp"
#include "fbsim/profile_yaml.hpp"
#include "fbsim/radio_env.hpp"
#include "fbsim/rng.hpp"
#include "fbsim/trace.hpp"
#include "fbsim/types.hpp"
#include "fbsim/ue_context.hpp"
#include "fbsim/ue_stack.hpp"
