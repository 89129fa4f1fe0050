"""Default product-category tickers for e-commerce websites."""

DEFAULT_TICKERS = {
    "AAR": "Autoparts and Automobile Retailer",
    "ACFR": "Arts, Crafts and Fabric Retailers",
    "BPR": "Baby Products Retailers",
    "BSR": "Bags and Suitcases Retailer",
    "CSJWAR": "Clothing, Shoes, Jewellery, Watch and Accessories Retailer",
    "CVPR": "Cigarette & Vape Products Retailer",
    "ESCR": "Eyeglasses, Sunglasses and Contacts Retailer",
    "ETR": "Electronics and Technology Retailer",
    "FBGR": "Foods, Beverages and Groceries Retailer",
    "FSPSR": "Fitness & Sports Products and Services Retailer",
    "G": "General",
    "GPR": "Gardening Products Retailer",
    "GTR": "Gifts and Toys Retailer",
    "HICPR": "Home Improvement and Cleaning Products Retailer",
    "HSPPR": "Health Services and Pharmaceutical Products Retailers",
    "KTER": "Kitchen tools and Equipments Retailer",
    "MEEPR": "Media, Education and Entertainment Products Retailer",
    "MEP": "Marketing and E-commerce Platform",
    "MPR": "Metal Products Retailer",
    "MPSR": "Music Products and Services Retailer",
    "MS": "Mail Services",
    "ORMR": "Outdoor Recreation Merchandise Retailer",
    "OSSR": "Office and Stationary Supplies Retailer",
    "PCBPR": "Personal Care and Beauty Products Retailer",
    "PDS": "Packaging And Distribution Services",
    "PLPR": "Printing and Labels Products Retailer",
    "PEMSR": "Party Products and Event Management Services Retailer",
    "PPR": "Pet Products Retailer",
    "PVER": "Photo and Video Equipment Retailer",
    "WITER": "Weapons, Industrial Tools and Equipment Retailer",
}
