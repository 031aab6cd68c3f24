//! Feature extraction: EMD and Hilbert-Huang summaries, B-spline wavelet
//! bands, decimated amplitude, and PCA reduction.

mod assemble;
mod emd;
mod hilbert;
mod pca;
mod spline;
mod wavelet;

pub use self::assemble::{
    amplitude_len, assemble_features, decimate_mean, feature_len, BlockKind, FeatureBlock,
    FeatureVector, AMPLITUDE_RATE_HZ,
};
pub use self::emd::{
    emd, emd_with, envelope_mean, is_imf, local_extrema, zero_crossings, EmdConfig, Extrema,
    ImfDecomposition,
};
pub use self::hilbert::{analytic_signal, hht_features, HHT_FEATURES};
pub use self::pca::{covariance, pca_fit, pca_project, PcaModel, Retain, Standardizer};
pub use self::wavelet::{
    band_len, padded_len, wavedec, wavelet_bands, wavelet_levels, WaveletDecomposition,
};
