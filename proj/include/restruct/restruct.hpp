#pragma once

// Everything except the command-line front end and the HTTP chat backend,
// which pull in CLI11 and cpp-httplib.

#include "restruct/agent_protocol.hpp"
#include "restruct/agents.hpp"
#include "restruct/canonical.hpp"
#include "restruct/chat_backend.hpp"
#include "restruct/error.hpp"
#include "restruct/evaluator.hpp"
#include "restruct/evolution.hpp"
#include "restruct/grammar.hpp"
#include "restruct/hin_graph.hpp"
#include "restruct/io.hpp"
#include "restruct/log.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/metrics.hpp"
#include "restruct/mutations.hpp"
#include "restruct/prompts.hpp"
#include "restruct/random.hpp"
#include "restruct/schema.hpp"
#include "restruct/seeding.hpp"
#include "restruct/sparse_matrix.hpp"
#include "restruct/splits.hpp"
#include "restruct/stub_backend.hpp"
#include "restruct/synthetic.hpp"
