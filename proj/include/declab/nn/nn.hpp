#pragma once

#include "declab/nn/adam.hpp"
#include "declab/nn/beam.hpp"
#include "declab/nn/checkpoint.hpp"
#include "declab/nn/model.hpp"
#include "declab/nn/transformer.hpp"
