from .client import (
    CallRecord,
    ClientError,
    CompletionClient,
    HttpCompletionClient,
    MockCompletionClient,
    ProviderConfig,
    make_client,
)
from .rag import RagDocument, RagStore, default_rag_store, load_rag_store, retrieve_context
from .roles import (
    STAGES,
    CapabilityError,
    EvaluationScores,
    ReferenceNote,
    StageFailed,
    UngradableReply,
    default_rubric_text,
    describe_reference,
    evaluate_design,
    grade,
    spatial_propose,
    translate,
)
from .templates import MissingPlaceholder, append_section, render_prompt, template_body

__all__ = [
    "CallRecord",
    "ClientError",
    "CompletionClient",
    "HttpCompletionClient",
    "MockCompletionClient",
    "ProviderConfig",
    "make_client",
    "RagDocument",
    "RagStore",
    "default_rag_store",
    "load_rag_store",
    "retrieve_context",
    "STAGES",
    "CapabilityError",
    "EvaluationScores",
    "ReferenceNote",
    "StageFailed",
    "UngradableReply",
    "default_rubric_text",
    "describe_reference",
    "evaluate_design",
    "grade",
    "spatial_propose",
    "translate",
    "MissingPlaceholder",
    "append_section",
    "render_prompt",
    "template_body",
]
