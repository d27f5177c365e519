#pragma once

#include "dreb/types.hpp"

namespace dreb {

// The three input views every downstream consumer works with:
//   Full        — tokens verbatim.
//   ContextOnly — each entity span collapsed to one "[TYPE]" placeholder.
//   EntityOnly  — subject surface, subject type, object surface, object type,
//                 in that order, nothing else.
enum class InputView { Full, ContextOnly, EntityOnly };

// A rendered view plus where the entities sit inside it. Models consume
// this rather than raw token lists so span pooling works in every view.
struct ViewEncoding {
  TokenList tokens;
  Span subj;
  Span obj;
  std::string subj_type;
  std::string obj_type;
};

std::string context_placeholder(const std::string& entity_type);

ViewEncoding render_encoding(const Sample& s, InputView view);

// Token list of the rendered view. Pure: same sample + view gives the same
// output on every call.
TokenList render_view(const Sample& s, InputView view);

const char* view_name(InputView view);
InputView view_from_name(const std::string& name);

}  // namespace dreb
