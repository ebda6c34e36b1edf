#pragma once

#include "level_forge/caption.hpp"
#include "level_forge/concepts.hpp"
#include "level_forge/dataset.hpp"
#include "level_forge/diversity.hpp"
#include "level_forge/error.hpp"
#include "level_forge/external_generator.hpp"
#include "level_forge/generator.hpp"
#include "level_forge/json_io.hpp"
#include "level_forge/project.hpp"
#include "level_forge/protocol.hpp"
#include "level_forge/random.hpp"
#include "level_forge/scoring.hpp"
#include "level_forge/service.hpp"
#include "level_forge/solvability.hpp"
#include "level_forge/tile.hpp"
