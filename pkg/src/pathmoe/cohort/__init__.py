from .anatomy import (
    BACKGROUND_PATCHES,
    D_TOK,
    HEPATIC_PATCHES,
    LESION_SITES,
    N_ORGANS,
    N_PATCHES,
    N_SLICES,
    OCCUPANCY_TEMPLATE,
    ORGANS,
    VESSEL_PATCHES,
    SyntheticStudy,
    content_embedding,
    render_image_tokens,
)
from .generator import (
    LOW_LIVER_THRESHOLD,
    Cohort,
    CohortConfig,
    LatentPatient,
    PatientData,
    SurvivalRecord,
    bilobar_of,
    cohort_arrays,
    generate_cohort,
    immunoscore_class_of,
    liver_summary,
    palbi_class_of,
    split_indices,
    true_log_hazard,
    tumor_summary,
)
from .io import export_cohort, import_cohort
from .reports import (
    LIVER_BASE,
    N_BINS,
    NEUTRAL_BASE,
    SEGMENT_RANGES,
    TUMOR_BASE,
    VOCAB_SIZE,
    ReportSegments,
    quantize_factor,
    render_report,
)
