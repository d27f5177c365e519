#include "dreb/views.hpp"

namespace dreb {

std::string context_placeholder(const std::string& entity_type) {
  return "[" + entity_type + "]";
}

ViewEncoding render_encoding(const Sample& s, InputView view) {
  ViewEncoding enc;
  enc.subj_type = s.subj_type;
  enc.obj_type = s.obj_type;

  switch (view) {
    case InputView::Full: {
      enc.tokens = s.tokens;
      enc.subj = s.subj_span;
      enc.obj = s.obj_span;
      break;
    }
    case InputView::ContextOnly: {
      // Substitute each span with a single placeholder, earlier span first
      // so the later span's offsets shift consistently.
      const bool subj_first = s.subj_span.start < s.obj_span.start;
      const Span& first = subj_first ? s.subj_span : s.obj_span;
      const Span& second = subj_first ? s.obj_span : s.subj_span;
      const std::string first_ph =
          context_placeholder(subj_first ? s.subj_type : s.obj_type);
      const std::string second_ph =
          context_placeholder(subj_first ? s.obj_type : s.subj_type);

      TokenList out;
      out.reserve(s.tokens.size());
      out.insert(out.end(), s.tokens.begin(),
                 s.tokens.begin() + static_cast<std::ptrdiff_t>(first.start));
      Span first_out{out.size(), out.size() + 1};
      out.push_back(first_ph);
      out.insert(out.end(),
                 s.tokens.begin() + static_cast<std::ptrdiff_t>(first.end),
                 s.tokens.begin() + static_cast<std::ptrdiff_t>(second.start));
      Span second_out{out.size(), out.size() + 1};
      out.push_back(second_ph);
      out.insert(out.end(),
                 s.tokens.begin() + static_cast<std::ptrdiff_t>(second.end),
                 s.tokens.end());

      enc.tokens = std::move(out);
      enc.subj = subj_first ? first_out : second_out;
      enc.obj = subj_first ? second_out : first_out;
      break;
    }
    case InputView::EntityOnly: {
      // Canonical order: subject surface, subject type, object surface,
      // object type. Context never leaks into this view.
      TokenList subj = s.subj_surface();
      TokenList obj = s.obj_surface();
      enc.tokens.reserve(subj.size() + obj.size() + 2);
      enc.tokens.insert(enc.tokens.end(), subj.begin(), subj.end());
      enc.subj = Span{0, subj.size()};
      enc.tokens.push_back(s.subj_type);
      std::size_t obj_start = enc.tokens.size();
      enc.tokens.insert(enc.tokens.end(), obj.begin(), obj.end());
      enc.obj = Span{obj_start, obj_start + obj.size()};
      enc.tokens.push_back(s.obj_type);
      break;
    }
  }
  return enc;
}

TokenList render_view(const Sample& s, InputView view) {
  return render_encoding(s, view).tokens;
}

const char* view_name(InputView view) {
  switch (view) {
    case InputView::Full:
      return "full";
    case InputView::ContextOnly:
      return "context_only";
    case InputView::EntityOnly:
      return "entity_only";
  }
  return "full";
}

InputView view_from_name(const std::string& name) {
  if (name == "full") return InputView::Full;
  if (name == "context_only") return InputView::ContextOnly;
  if (name == "entity_only") return InputView::EntityOnly;
  throw ConfigError("unknown input view '" + name + "'");
}

}  // namespace dreb
