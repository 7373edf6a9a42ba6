"""Corpus-level characterization: distribution tests, domain analysis,
image-reuse hashing, and registration metadata."""

from .dhash import ImageHash, dhash, hamming_distance, hamming_near_duplicates
from .ks import ks_pvalue, ks_statistic
from .psl import DomainSplit, PublicSuffixList, etld_plus_one
from .rdap import DomainRecord, RdapResolver, rdap_lookup
from .webstats import (
    RequestLog,
    TrackerList,
    load_har_request_log,
    text_length_report,
    third_party_stats,
)

__all__ = [
    "DomainRecord",
    "DomainSplit",
    "ImageHash",
    "PublicSuffixList",
    "RdapResolver",
    "RequestLog",
    "TrackerList",
    "dhash",
    "etld_plus_one",
    "hamming_distance",
    "hamming_near_duplicates",
    "ks_pvalue",
    "ks_statistic",
    "load_har_request_log",
    "rdap_lookup",
    "text_length_report",
    "third_party_stats",
]
