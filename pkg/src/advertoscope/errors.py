"""Exception hierarchy shared across the toolkit."""


class AdvertoscopeError(Exception):
    """Base class for all library errors."""


class EmptyDocument(AdvertoscopeError):
    """Raised when a parsed page yields no text elements at all."""


class SchemaError(AdvertoscopeError):
    """A structured input (snapshot, feature schema, model file) is malformed."""


class GeometryError(AdvertoscopeError):
    """A rendered snapshot carries impossible geometry (e.g. negative offsets)."""


class SelectorParseError(AdvertoscopeError):
    """A selector rule could not be parsed at load time."""


class NoVisibleText(AdvertoscopeError):
    """An operation requiring visible text ran on a page without any."""


class EmptyText(AdvertoscopeError):
    """A text metric was requested for a token stream with no tokens."""


class EmptyNode(AdvertoscopeError):
    """Gini impurity requested for an empty class-count vector."""


class SingleClassDataset(AdvertoscopeError):
    """Training or cross-validation needs at least one example per class."""


class SchemaMismatch(AdvertoscopeError):
    """A report signal or feature vector conflicts with the declared schema."""


class EmptySample(AdvertoscopeError):
    """A statistical test received an empty sample."""


class UnresolvableSuffix(AdvertoscopeError):
    """The hostname is itself a public suffix; no registrable domain exists."""


class InvalidHostname(AdvertoscopeError):
    """The hostname cannot be parsed into labels."""


class RdapUnavailable(AdvertoscopeError):
    """No RDAP endpoint answered for the domain (callers get an unknown-record)."""


class FetchError(AdvertoscopeError):
    """A landing page could not be retrieved."""
