"""Language-model proposal distribution: prompts, providers and caching."""
from .prompts import (
    BoardFormat,
    ChatMessage,
    Mode,
    PromptBundle,
    PromptError,
    Role,
    build_generation_prompt,
    build_translation_prompt,
    encode_prepended,
    game_description,
    sample_translation_examples,
)
from .proposal import Invalid, parse_translation, propose_questions, translate_question
from .providers import (
    ChatCompletionProvider,
    Provider,
    ProviderError,
    ProviderSpec,
    ReplayProvider,
    RequestContext,
    ResponseCache,
    request_digest,
)

__all__ = [
    "BoardFormat", "ChatCompletionProvider", "ChatMessage", "Invalid", "Mode", "PromptBundle",
    "PromptError", "Provider", "ProviderError", "ProviderSpec", "ReplayProvider", "RequestContext",
    "ResponseCache", "Role", "build_generation_prompt", "build_translation_prompt", "encode_prepended",
    "game_description", "parse_translation", "propose_questions", "request_digest",
    "sample_translation_examples", "translate_question",
]
