#pragma once

#include "mssr/image.hpp"

namespace mssr {

struct YCbCrImage {
    ImagePlane y;
    ImagePlane cb;
    ImagePlane cr;
};

/// BT.601 studio-swing conversion on [0, 1] values:
/// Y in [16/255, 235/255], Cb and Cr centred on 128/255.
YCbCrImage rgb_to_ycbcr(const RgbImage& img);

/// Exact inverse of rgb_to_ycbcr (no clipping).
RgbImage ycbcr_to_rgb(const YCbCrImage& img);

/// The Y plane of rgb_to_ycbcr.
ImagePlane luminance(const RgbImage& img);

}  // namespace mssr
