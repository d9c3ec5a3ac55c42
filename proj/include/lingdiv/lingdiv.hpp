#pragma once

#include "lingdiv/bias.hpp"
#include "lingdiv/corpus.hpp"
#include "lingdiv/count_table.hpp"
#include "lingdiv/did.hpp"
#include "lingdiv/diversity.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/registry.hpp"
#include "lingdiv/shift.hpp"
#include "lingdiv/stats.hpp"
#include "lingdiv/synth.hpp"
