#pragma once

#include "sslzsl/baselines.hpp"
#include "sslzsl/dataset.hpp"
#include "sslzsl/error.hpp"
#include "sslzsl/eval.hpp"
#include "sslzsl/io.hpp"
#include "sslzsl/matrix.hpp"
#include "sslzsl/model.hpp"
#include "sslzsl/numdiff.hpp"
#include "sslzsl/optim.hpp"
#include "sslzsl/report.hpp"
#include "sslzsl/rng.hpp"
