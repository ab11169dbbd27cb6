#pragma once

#include "neuromap/capture.hpp"
#include "neuromap/error.hpp"
#include "neuromap/estimator.hpp"
#include "neuromap/external.hpp"
#include "neuromap/metrics.hpp"
#include "neuromap/model.hpp"
#include "neuromap/navigate.hpp"
#include "neuromap/optim.hpp"
#include "neuromap/pose.hpp"
#include "neuromap/report.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/train.hpp"
#include "neuromap/version.hpp"
#include "neuromap/world.hpp"
