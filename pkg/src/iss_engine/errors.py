"""Domain error types shared across modules."""


class DomainError(Exception):
    """Base class for all domain-level failures."""

    code = "domain_error"


class KindMismatch(DomainError):
    code = "kind_mismatch"


class InvalidTree(DomainError):
    code = "invalid_tree"


class EmptyCorpus(DomainError):
    code = "empty_corpus"


class EmptyCluster(DomainError):
    code = "empty_cluster"


class UnknownFocusNode(DomainError):
    code = "unknown_focus_node"


class RepoTooLarge(DomainError):
    code = "repo_too_large"


class KTooLarge(DomainError):
    code = "k_too_large"


class EmptyLog(DomainError):
    code = "empty_log"


class EmptySelection(DomainError):
    code = "empty_selection"


class UnboundActivity(DomainError):
    code = "unbound_activity"


class MalformedProcess(DomainError):
    code = "malformed_process"


class SearchSpaceTooLarge(DomainError):
    code = "search_space_too_large"


class NoFeasibleSolution(DomainError):
    code = "no_feasible_solution"


class UnknownRp(DomainError):
    code = "unknown_rp"


class InfeasibleSolution(DomainError):
    code = "infeasible_solution"


class MissingDir(DomainError):
    code = "missing_dir"


class CorruptDocument(DomainError):
    code = "corrupt_document"


class NotFound(DomainError):
    code = "not_found"
