"""Exception hierarchy shared by every pipeline stage."""


class NosqintError(Exception):
    """Base class; ``module`` names the pipeline stage that raised."""

    module = "nosqint"


# store
class StoreError(NosqintError):
    module = "store"


class ParseError(StoreError):
    pass


class DuplicateKey(StoreError):
    pass


class NestedColumnValue(StoreError):
    pass


class UnknownContainer(StoreError):
    pass


class UnknownDatabase(StoreError):
    pass


# dlcore
class DLError(NosqintError):
    module = "dlcore"


class UnknownName(DLError):
    pass


class UnknownIndividual(DLError):
    pass


class EmptyInput(DLError):
    pass


class CyclicDefinitions(DLError):
    pass


# fca
class FCAError(NosqintError):
    module = "fca"


class IndexOutOfRange(FCAError, IndexError):
    pass


# induction
class InductionError(NosqintError):
    module = "induction"


class LogParseError(InductionError):
    pass


# alignment
class AlignmentError(NosqintError):
    module = "alignment"


class SameOntology(AlignmentError):
    pass


# globalont
class GlobalOntologyError(NosqintError):
    module = "globalont"


class ConflictError(GlobalOntologyError):
    pass


class UnknownOntologyId(GlobalOntologyError):
    pass


class UnknownEntity(GlobalOntologyError):
    pass


# queryfront
class QueryError(NosqintError):
    module = "queryfront"


class SparqlSyntaxError(QueryError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnsupportedFeature(QueryError):
    def __init__(self, construct: str, position: int | None = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unsupported feature {construct}{where}")
        self.construct = construct
        self.position = position


class UnboundSelectVar(QueryError):
    pass


# bql
class BqlError(NosqintError):
    module = "bql"


class UnresolvableType(BqlError):
    pass


class UnmappedPredicate(BqlError):
    pass


class CrossSourceJoin(BqlError):
    pass


class SchemaMismatch(BqlError):
    pass
