// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/llm/hashed_embedder.hpp"
#include "labyrinth/llm/provider.hpp"

namespace labyrinth::llm {

// Deterministic offline stand-in for a hosted model. Replies depend only on
// the prompt, so one instance can serve many sessions.
//
//   gm            rolls activate_test for the last speaker when the tool is
//                 offered (else add_object), then narrates the result
//   judge         "continue" until context.turns_completed reaches the
//                 configured count, then "success"; asks for a clock advance
//                 when context.failed_tests > 0
//   summarize     a digest of the prompt messages
//   npc_gen       an NPC spec derived from context.name
//   state_regen   echoes context.states unchanged
//   paraphrase    rewords context.text
//   player_agent  an action line for context.player
// Scene-initialization purposes are not supported and yield Stop.
class CannedGmProvider final : public LlmProvider {
public:
    explicit CannedGmProvider(int judge_success_after_turns = 4) : success_after_(judge_success_after_turns) {}

    ModelTurn complete(const PromptPackage& prompt) override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override { return embedder_.embed(texts); }

private:
    ModelTurn gm_turn(const PromptPackage& prompt) const;

    int success_after_;
    HashedEmbedder embedder_;
};

}  // namespace labyrinth::llm
